import cmath
import random
from fractions import Fraction

import pytest

from so5match import harmonic as hm
from so5match.groups import NONSPLIT, SPLIT
from so5match.symbolic import ClosedForm, QSqrtRational

q = 3
X = ClosedForm.X(q)
Xi = ClosedForm.monomial(-1, 1, q)
SQ = QSqrtRational.sqrt_q(q)


@pytest.mark.parametrize("p,expected", [(3, (8, 12, 6, 3)), (5, (24, 30, 20, 5)), (7, (48, 56, 42, 7))])
def test_finite_field_counts(p, expected):
    assert tuple(hm.count_fq(eq, p) for eq in hm.EQUATIONS) == expected


def test_count_rejects_unknown_equation():
    with pytest.raises(ValueError):
        hm.count_fq("nonsense", 3)


def test_scan_r0_split_piece():
    h = hm.hecke_orbit_scan(0, SPLIT, 3)
    assert dict(h["Kb1N1"]) == {1: 15, 0: 12}
    assert dict(h["total"]) == {1: 24, 0: 16}


def test_scan_r0_nonsplit():
    assert dict(hm.hecke_orbit_scan(0, NONSPLIT, 3)["total"]) == {1: 30, 0: 10}


@pytest.mark.parametrize("case", [SPLIT, NONSPLIT])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_scan_generic_r(case, r):
    h = hm.hecke_orbit_scan(r, case, 3)
    assert dict(h["Kb1N1"]) == {r + 1: 18, r: 8, r - 1: 1}
    assert dict(h["Kb1inv"]) == {r + 1: 1}
    assert dict(h["total"]) == {r + 1: 27, r: 12, r - 1: 1}


def test_scan_p5_totals():
    assert sum(hm.scan_total(2, SPLIT, 5).values()) == hm.hecke_degree(5) == 156


def test_lambda_values(split3, nonsplit3):
    assert [hm.lambda_vol(r, split3) for r in range(3)] == [1, 24, 648]
    assert [hm.lambda_vol(r, nonsplit3) for r in range(3)] == [1, 30, 810]


def test_lambda_recursion_path():
    seeds = hm.lambda_from_scan(2, SPLIT, 3)
    lam = hm.lambda_recursion(8, (3, *seeds))
    assert lam == [hm.lambda_closed(r, 3, -1) for r in range(9)]
    assert lam[2] == 648
    assert all(lam[r + 1] == 28 * lam[r] - 27 * lam[r - 1] for r in range(2, 8))


def test_lambda_errors(split3):
    with pytest.raises(ValueError):
        hm.lambda_vol(-1, split3)
    with pytest.raises(LookupError):
        hm.lambda_vol(1, hm.CaseTag(SPLIT, 3, 2, {}))


@pytest.mark.parametrize("case", [SPLIT, NONSPLIT])
def test_volume_balance(case):
    lam = hm.lambda_from_scan(5, case, 3)
    for r in range(4):
        lhs, rhs = hm.volume_balance(r, lam, case, 3)
        assert lhs == rhs


def test_satake_value():
    expected = (X + Xi + SQ + QSqrtRational.q_power(-1, q)) * QSqrtRational.q_power(3, q)
    assert hm.satake_f1(q) == expected
    assert hm.satake_from_cosets(q) == expected


def test_delta_B():
    assert hm.delta_B(-1, 0, q) == 27
    assert hm.delta_B(0, -1, q) == 3
    assert hm.delta_B(0, 1, q) == Fraction(1, 3)
    # |a|^3 |b| on diag(a, b, 1, 1/b, 1/a)
    assert hm.delta_B(2, 1, q) == Fraction(1, 3**7)


def test_T1_split():
    expected = ((X + Xi) * QSqrtRational.q_power(3, q) - q - 1) / (q**3 - q)
    assert hm.T1_formula(q, -1) == expected


@pytest.mark.parametrize("case", [SPLIT, NONSPLIT])
def test_spherical_closed_equals_recursion_and_scan(case):
    tag = hm.CaseTag(case, 3, 2, {"spherical": -1 if case == SPLIT else 1, "T1": -1 if case == SPLIT else 1})
    scan = hm.T_from_scan(4, case, 3)
    for r in range(9):
        T = hm.spherical_T(r, tag)
        if r <= 4:
            assert T == scan[r]
    assert hm.spherical_T(0, tag) == 1


def test_eigen_equation_at_random_points(tag3):
    rng = random.Random(5)
    T = [hm.spherical_T(r, tag3) for r in range(5)]
    for _ in range(5):
        X0 = cmath.exp(2j * cmath.pi * rng.random())
        for r in range(4):
            assert hm.eigen_residual(r, T, tag3.variant, 3, X0) < 1e-10


def test_whittaker_values():
    assert hm.whittaker_W(0, q) == 1
    assert hm.whittaker_W(1, q) == (X + Xi) * (-QSqrtRational.q_power(-1, q))
    assert hm.whittaker_W(2, q) == (X * X + 1 + Xi * Xi) * Fraction(1, 3)
    assert hm.whittaker_W(-1, q) == 0


def test_whittaker_pairing():
    assert hm.whittaker_pairing(0, q) == 1
    assert hm.whittaker_pairing(1, q) == (X + Xi) * (-SQ)


def test_pairing_r1_split(split3):
    direct = 1 + hm.spherical_T(1, split3) * hm.lambda_vol(1, split3)
    assert hm.pairing_G(1, split3) == direct
    P = hm.pairing_G(4, split3)
    assert P == P.substitute_inverse()


def test_transfer_coefficients(split3, nonsplit3):
    assert hm.transfer_F(0, split3) == {0: 1}
    assert hm.transfer_F(1, split3) == {1: -3, 0: -3}
    assert hm.transfer_F(1, nonsplit3) == {1: -3, 0: 3}
    for r in range(7):
        hm.transfer_F(r, split3)
        hm.transfer_F(r, nonsplit3)


def test_transfer_with_wrong_sign_fails():
    bad = hm.CaseTag(SPLIT, 3, 2, {"spherical": -1, "T1": -1, "volume": -1, "pairing": -1, "transfer": -1})
    with pytest.raises(ArithmeticError):
        hm.transfer_F(2, bad)
