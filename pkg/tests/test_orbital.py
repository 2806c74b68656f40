import cmath
from fractions import Fraction

import pytest

from so5match import orbital as orb
from so5match.groups import NONSPLIT, SPLIT
from so5match.harmonic import CaseTag
from so5match.padic import CharacterSpec, Qp, psi_add
from so5match.symbolic import ClosedForm

F = Qp(3)
q = 3

DUAL = [(a, r) for r in (0, 1, 2) for a in (1, 2, 3, 6, Fraction(1, 3), Fraction(2, 3), Fraction(4, 3), 9)
        if r - F(a).valuation <= 2]


@pytest.mark.parametrize("alpha,r", DUAL)
def test_psi_G_two_paths_agree(tag3, alpha, r):
    slow = orb.psi_G_matrix(alpha, r, tag3).value
    fast = orb.psi_G(alpha, r, tag3)
    assert abs(slow - fast) < 1e-10


def test_dual_path_coverage():
    assert len(DUAL) * 2 >= 20


@pytest.mark.parametrize("alpha,r", [(Fraction(1, 9), 1), (Fraction(5, 27), 0), (Fraction(2, 9), 2)])
def test_psi_G_tabulation_matches_triple_loop(tag3, alpha, r):
    assert abs(orb.psi_G_direct(alpha, r, tag3, L=1) - orb.psi_G(alpha, r, tag3)) < 1e-10


def test_psi_G_vanishes_below_support(tag3):
    # |1/alpha| > q^r
    assert orb.psi_G(27, 2, tag3) == 0
    assert orb.psi_G(3, 0, tag3) == 0


def test_psi_G_frozen_values(split3, nonsplit3):
    assert orb.psi_G(1, 0, split3) == pytest.approx(1)
    assert orb.psi_G(1, 1, split3) == pytest.approx(3)
    assert orb.psi_G(1, 1, nonsplit3) == pytest.approx(-3)
    assert orb.psi_G(Fraction(1, 3), 0, split3) == pytest.approx(-3)


def test_psi_G_rejects_zero(split3):
    with pytest.raises(ValueError):
        orb.psi_G(0, 1, split3)


def test_unstable_plan_is_reported(split3, monkeypatch):
    monkeypatch.setattr(orb, "STABILITY_TOL", -1.0)
    with pytest.raises(orb.UnstableIntegral):
        orb.psi_G(1, 1, split3)


GRID = [1, 2, 3, 9, Fraction(1, 3), Fraction(2, 9), Fraction(5, 27), 27, Fraction(7, 3), Fraction(1, 81)]


@pytest.mark.parametrize("r", [0, 1, 2, 3])
def test_psi_H_reduced_equals_matrix_path(tag3, r):
    for a in GRID:
        assert abs(orb.psi_H(a, r, tag3) - orb.psi_H(a, r, tag3, method="matrix")) < 1e-12


def test_psi_H_support_cases(split3, nonsplit3):
    # alpha = 1/3, r = 2: one shell from each Iwasawa branch
    assert orb.psi_H(Fraction(1, 3), 2, split3) == pytest.approx(2)
    # |alpha| large and r = 0: no shell contributes
    assert orb.psi_H(Fraction(1, 27), 0, split3) == 0
    # r = 0, alpha = 1: only the first branch, at |a| = 1
    assert orb.psi_H(1, 0, split3) == pytest.approx(1)
    # split iota = chi_0 with chi_0(p) = -1 at the shell v(a) = r + 2 v(alpha) = 1
    assert orb.psi_H(1, 1, split3) == pytest.approx(-1 + -1)
    assert orb.psi_H(1, 1, nonsplit3) == pytest.approx(2)


def test_psi_H_boundary_leak(split3):
    with pytest.raises(orb.BoundaryLeak):
        orb.psi_H(1, 2, split3, shell_range=(-2, 2), method="matrix")


def test_theta_symbol(split3, nonsplit3):
    assert orb.theta_symbol(F(3), split3) == 1
    assert orb.theta_symbol(F(3), nonsplit3) == -1
    assert orb.theta_symbol(F(9), nonsplit3) == 1


# -- shells and Gauss sums ----------------------------------------------------

def test_shell_integral_frozen():
    chi = CharacterSpec(3)
    one = F(1)
    assert orb.shell_integral(-1, one, chi, 3) == ClosedForm.monomial(-1, Fraction(1, 27), q)
    assert orb.shell_integral(0, one, chi, 3) == 1
    assert orb.shell_integral(1, one, chi, 3) == ClosedForm.monomial(1, Fraction(-27, 2), q)
    assert orb.shell_integral(2, one, chi, 3) == 0


@pytest.mark.parametrize("w", [1, 3])
@pytest.mark.parametrize("vx", [-2, 0, 2])
def test_shell_integral_three_cases(w, vx):
    chi = CharacterSpec(3)
    x = F.pi_power(vx)
    for k in range(-4, 5):
        assert orb.shell_integral(k, x, chi, w) == orb.lemma_shell_closed(k, vx, w, q)


def test_shell_integral_numeric_X():
    chi = CharacterSpec(3)
    val = orb.shell_integral(1, F(1), chi, 1, X=0.5)
    assert val == pytest.approx(-0.5 * 3 * 0.5)


@pytest.mark.parametrize("m", [1, 2])
def test_ramified_shells_vanish_off_conductor(m):
    chi = CharacterSpec(3, m, 1, cmath.exp(0.4j))
    for k in range(-2, 5):
        val = orb.shell_integral(k, F(1), chi, 1)
        if k != m:
            assert abs(val) < 1e-12
        else:
            assert abs(val) > 0.1


def test_gauss_tau_quadratic_two_terms():
    chi = CharacterSpec(3, 1, 1, 1.0)
    two_term = (psi_add(F(Fraction(1, 3))) - psi_add(F(Fraction(2, 3)))) / 2
    assert orb.gauss_tau(chi) == pytest.approx(two_term)
    assert orb.gauss_tau(chi) == pytest.approx(1j * 3**0.5 / 2)


@pytest.mark.parametrize("m,k", [(1, 1), (2, 1), (2, 2), (2, 5)])
def test_gauss_tau_size_and_conjugation(m, k):
    chi = CharacterSpec(3, m, k, cmath.exp(0.9j))
    tau = orb.gauss_tau(chi)
    assert abs(tau) * 2 * 3 ** (m - 1) == pytest.approx(3 ** (m / 2))
    assert orb.gauss_tau(chi.conjugate()) == pytest.approx(chi.unit_value(-1 % 3**m) * tau.conjugate())


def test_gauss_tau_preconditions():
    with pytest.raises(ValueError):
        orb.gauss_tau(CharacterSpec(3))
    with pytest.raises(ValueError):
        orb.gauss_tau(CharacterSpec(3, 1, 1))


# -- Mellin transforms --------------------------------------------------------

XS = [cmath.exp(1j * t) for t in (0.3, 1.7, 2.9)]


def test_mellin_H_closed_form(tag3):
    s = tag3.sign("mellin_h")
    for r in range(5):
        for X0 in XS + [0.4 + 0.1j]:
            assert abs(orb.mellin_H(r, CharacterSpec(3), tag3, X0) - orb.mellin_H_closed(r, q, s, X0)) < 1e-9


def test_mellin_combination_at_X_one(split3):
    assert orb.mellin_H_combination(1, CharacterSpec(3), split3, 1.0).value == pytest.approx(q + 1)


def test_mellin_combination_r0_has_the_other_sign(tag3):
    s = tag3.sign("combination")
    X0 = 0.3 + 0.2j
    got = orb.mellin_H_combination(0, CharacterSpec(3), tag3, X0).value
    assert got == pytest.approx(orb.mellin_combination_closed(0, q, -s, X0))


@pytest.mark.parametrize("m", [1, 2])
def test_ramified_mellin_H_corrected(tag3, m):
    chi = CharacterSpec(3, m, 1, cmath.exp(0.4j))
    for r in range(4):
        got = orb.mellin_H(r, chi, tag3)
        assert abs(got - orb.mellin_H_ramified_corrected(r, chi, tag3.variant)) < 1e-9
        assert abs(got - orb.mellin_H_ramified_stated(r, chi)) > 1.0


def test_mellin_G_instances(split3, nonsplit3):
    assert orb.mellin_G(1, CharacterSpec(3), split3, 1.0) == pytest.approx(4)
    assert orb.mellin_G(1, CharacterSpec(3), nonsplit3, 1.0) == pytest.approx(-2)


def test_mellin_G_ramified_vanishes(tag3):
    chi = CharacterSpec(3, 1, 1, cmath.exp(0.4j))
    assert abs(orb.mellin_G(1, chi, tag3)) < 1e-9


def test_mellin_G_equals_H_combination(tag3):
    for r in (1, 2):
        for X0 in XS[:2]:
            g = orb.mellin_G(r, CharacterSpec(3), tag3, X0)
            h = orb.mellin_H_combination(r, CharacterSpec(3), tag3, X0).value
            assert abs(g - h) < 1e-8


# -- matching -----------------------------------------------------------------

def test_matching_unit_element(tag3):
    assert orb.verify_matching(1, 0, tag3).passed


@pytest.mark.parametrize("alpha", [1, 3, Fraction(1, 3), 4])
def test_matching_split_r1(split3, alpha):
    rep = orb.verify_matching(alpha, 1, split3)
    assert rep.passed, rep


def test_matching_nonsplit_carries_symbol(nonsplit3):
    lhs, rhs, _ = orb.matching_sides(F(3), 1, nonsplit3)
    assert abs(lhs - rhs) < 1e-6
    # dropping the symbol (theta, 3) = -1 breaks the identity
    assert orb.theta_symbol(F(3), nonsplit3) == -1
    assert abs(lhs + rhs) > 0.5


def test_matching_r0_known_discrepancy(split3, nonsplit3):
    """Recorded behavior at r = 0, outside the range covered by the Mellin argument."""
    assert not orb.verify_matching(Fraction(1, 9), 0, split3).passed
    assert orb.verify_matching(Fraction(1, 3), 0, split3).passed
    assert not orb.verify_matching(Fraction(1, 3), 0, nonsplit3).passed


def test_report_status_logic():
    rep = orb.make_report("x", {}, 1.0, 1.0 + 1e-7, 1e-6)
    assert rep.passed
    rep = orb.make_report("x", {}, 1.0, 1.0, 1e-6, stable=False)
    assert rep.status == "fail"
