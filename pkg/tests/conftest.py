import pytest

from so5match.padic import Qp
from so5match.signs import resolved_tag

ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def F3():
    return Qp(3)


@pytest.fixture(scope="session")
def split3():
    return resolved_tag("split", 3)


@pytest.fixture(scope="session")
def nonsplit3():
    return resolved_tag("nonsplit", 3)


@pytest.fixture(scope="session", params=["split", "nonsplit"])
def tag3(request):
    return resolved_tag(request.param, 3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
