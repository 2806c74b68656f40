import json
import subprocess
import sys

import pytest

from so5match.cli import REPORT_FIELDS, SUITES, ConfigError, RunConfig, main, run_suite


def run_json(capsys, *args):
    code = main(["--output", "json", *args])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_counts_suite_passes(capsys):
    code, data = run_json(capsys, "--suite", "counts")
    assert code == 0
    header, records = data[0], data[1:]
    assert len(records) == 4
    assert all(r["status"] == "pass" for r in records)
    assert set(records[0]) == set(REPORT_FIELDS)


def test_header_fields(capsys):
    _, data = run_json(capsys, "--suite", "counts")
    header = data[0]
    assert header["p"] == 3 and header["theta"] == 2
    assert header["resolved_signs"]["split"]["matching"] == 1
    assert header["resolved_signs"]["nonsplit"]["matching"] == -1
    assert header["sign_conflicts_with_stated"]["split"] == {"spherical": [1, -1]}
    assert "version" in header


def test_tsv_layout(capsys):
    assert main(["--suite", "counts"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# {")
    assert lines[1].split("\t") == list(REPORT_FIELDS)
    assert len(lines) == 6
    assert all(len(row.split("\t")) == len(REPORT_FIELDS) for row in lines[2:])


def test_output_is_deterministic(capsys):
    args = ["--suite", "cosets", "spherical", "--coset-samples", "5", "--seed", "4"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first


def test_seed_changes_samples(capsys):
    main(["--suite", "cosets", "--coset-samples", "5", "--seed", "1", "--output", "json"])
    a = capsys.readouterr().out
    main(["--suite", "cosets", "--coset-samples", "5", "--seed", "2", "--output", "json"])
    assert capsys.readouterr().out != a


@pytest.mark.parametrize("suite", ["counts", "volumes", "whittaker", "shells", "matching"])
def test_fault_injection_is_detected(capsys, suite):
    extra = ["--r-max", "1"] if suite == "matching" else []
    assert main(["--suite", suite, "--inject-fault", suite, *extra]) == 1
    capsys.readouterr()


def test_fault_outside_selected_suite_is_harmless(capsys):
    assert main(["--suite", "counts", "--inject-fault", "volumes"]) == 0
    capsys.readouterr()


@pytest.mark.parametrize("args", [["--p", "4"], ["--p", "9"], ["--theta", "4"], ["--theta", "x"],
                                  ["--precision", "5"], ["--suite", "nope"], ["--inject-fault", "nope"],
                                  ["--x-samples", "0"]])
def test_config_errors_exit_2(capsys, args):
    assert main(args) == 2
    assert "configuration error" in capsys.readouterr().err


def test_validate_fills_theta():
    cfg = RunConfig(p=7).validate()
    assert cfg.theta == 3
    with pytest.raises(ConfigError):
        RunConfig(p=7, theta=2).validate()


def test_volumes_at_p5_are_exact():
    _, reports, status = run_suite(RunConfig(p=5, suite=("volumes",)))
    assert status == 0
    assert all(r.abs_err == 0 for r in reports)


def test_matching_grid_size():
    _, reports, _ = run_suite(RunConfig(r_max=1, suite=("matching",)))
    # 2 cases x 2 values of r x 5 valuations x 2 unit classes
    assert len(reports) == 40
    assert {r.passed for r in reports if "/r1/" in r.check_id} == {True}


def test_out_file_and_summary(tmp_path, capsys):
    out = tmp_path / "r.tsv"
    assert main(["--suite", "counts", "--out", str(out), "--summary"]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "4/4 passed" in captured.err
    assert out.read_text().count("\n") == 6


def test_every_suite_name_is_a_runner_method():
    from so5match.cli import Runner
    assert all(callable(getattr(Runner, s)) for s in SUITES)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "so5match", "--suite", "counts", "--p", "5"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.count("\tpass") == 4
