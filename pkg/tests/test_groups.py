import random
from fractions import Fraction

import pytest

from so5match.groups import (
    CASES,
    NONSPLIT,
    PIECES,
    SPLIT,
    MatrixG,
    MatrixH,
    PMatrix,
    build_n,
    classify_orbit,
    coset_lifts,
    coset_piece,
    diag_H,
    eval_phi_r,
    iwasawa_H,
    n_H,
    open_orbit_solve,
    orbit_point,
    pgsp4_to_so5,
    quad_form,
    random_k,
    random_kb1k,
    similitude_factor,
    smith_valuations,
    standard_elements,
)
from so5match.padic import PadicNumber, PrecisionError, Qp, psi_add


def test_build_n_identity(F3):
    assert build_n(0, 0, 0, 0, F3).equals(PMatrix.identity(5, F3))


def test_build_n_corner_entry(F3):
    x1, x2, x3 = Fraction(2, 3), Fraction(5), Fraction(-1, 9)
    n = build_n(x1, x2, x3, 0, F3)
    assert n[0, 4] == -x1 * x3 - x2 * x2 / 2


def test_random_unipotents_preserve_form(F3):
    rng = random.Random(3)
    for _ in range(10):
        xs = [Fraction(rng.randrange(-40, 40), 3 ** rng.randrange(3)) for _ in range(4)]
        assert build_n(*xs, F=F3).in_G()


@pytest.mark.parametrize("case", CASES)
def test_standard_elements(case, F3):
    E = standard_elements(case, F3)
    assert all(a == b for a, b in zip(E.gamma0 @ E.v0, E.v1))
    for g in (E.gamma0, E.b1, E.b2, E.d(3), E.a(Fraction(2, 9))):
        assert g.in_G()
    assert quad_form(E.v1) == E.Qvalue
    assert quad_form(E.v0) == E.Qvalue


def test_nonsplit_sphere_value(F3):
    E = standard_elements(NONSPLIT, F3)
    assert quad_form(E.v0) == 4 * 2
    assert [x.to_fraction() for x in E.v0] == [0, 4, 0, 1, 0]


def test_psi_N(F3):
    Es, En = standard_elements(SPLIT, F3), standard_elements(NONSPLIT, F3)
    x1, x2, x3 = Fraction(1, 3), Fraction(2, 9), Fraction(1, 9)
    assert Es.psi_N(x1, x2, x3) == pytest.approx(psi_add(F3(x2)))
    assert En.psi_N(x1, x2, x3) == pytest.approx(psi_add(F3(x1 + 4 * x3)))


@pytest.mark.parametrize("case", CASES)
def test_classify_d_r_v1(case, F3):
    E = standard_elements(case, F3)
    for r in range(5):
        assert classify_orbit(E.d(r) @ list(E.v1)) == r


def test_classify_rejects_small_vectors(F3):
    with pytest.raises(PrecisionError):
        classify_orbit([F3(3)] * 5)


@pytest.mark.parametrize("case", CASES)
def test_open_orbit_solver_inverts_orbit_point(case, F3):
    E = standard_elements(case, F3)
    for x, alpha in [((1, 2, 0), 1), ((Fraction(1, 3), 5, Fraction(7, 9)), Fraction(2, 3)), ((0, 0, 1), 9)]:
        s = orbit_point(*x, alpha, E)
        assert quad_form(s) == E.Qvalue
        got, a = open_orbit_solve(s, E)
        assert a == alpha
        assert all(g == F3(v) for g, v in zip(got, x))


def test_smith_valuations(F3):
    E = standard_elements(SPLIT, F3)
    assert smith_valuations(E.b1) == (-1, 0, 0, 0, 1)
    rng = random.Random(0)
    k = random_k(F3, rng)
    assert k.in_K() and k.in_G()
    assert smith_valuations(k) == (0, 0, 0, 0, 0)


def test_coset_piece_sizes(F3):
    lifts = coset_lifts(F3)
    sizes = [len(lifts[name][1]) for name in PIECES]
    assert sizes == [27, 9, 3, 1]
    assert sum(sizes) == 27 + 9 + 3 + 1


def test_coset_piece_of_generators(F3):
    E = standard_elements(SPLIT, F3)
    lifts = coset_lifts(F3)
    assert [f[0] for f in coset_piece(E.b1, F3, lifts)] == ["Kb1N1"]
    assert [f[0] for f in coset_piece(E.b1.inverse(), F3, lifts)] == ["Kb1inv"]
    assert [f[0] for f in coset_piece(E.b2, F3, lifts)] == ["Kb2N2"]
    assert [f[0] for f in coset_piece(E.b2.inverse(), F3, lifts)] == ["Kb2invN3"]


def test_random_kb1k_in_one_piece(F3):
    lifts = coset_lifts(F3)
    rng = random.Random(11)
    for _ in range(15):
        g = random_kb1k(F3, rng)
        assert len(coset_piece(g, F3, lifts)) == 1


# -- PGSp(4) -----------------------------------------------------------------

def _nprime(x, y, z, F):
    return PMatrix.from_columns([(1, 0, 0, 0), (0, 1, 0, 0), (x, z, 1, 0), (y, x, 0, 1)], F)


def test_pgsp4_identity(F3):
    assert pgsp4_to_so5(PMatrix.identity(4, F3)).equals(PMatrix.identity(5, F3))


def test_pgsp4_homomorphism_and_image_in_G(F3):
    a = PMatrix.diag([2, 5, Fraction(7, 5), Fraction(7, 2)], F3)
    b = _nprime(Fraction(1, 3), 4, -2, F3)
    assert similitude_factor(a) == 7
    ga, gb = pgsp4_to_so5(a), pgsp4_to_so5(b)
    assert ga.in_G() and gb.in_G()
    assert pgsp4_to_so5(a @ b).equals(ga @ gb)


def test_pgsp4_rejects_non_similitude(F3):
    with pytest.raises(ValueError):
        pgsp4_to_so5(PMatrix([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]], F3))


def test_unipotent_correspondence(F3):
    """The displayed 5x5 unipotent is the image of n'(-x, -y, -z), i.e. the
    inverse of the image of n'(x, y, z); it equals n(-2z, 2x, y, 0)."""
    x, y, z = Fraction(2), Fraction(5), Fraction(7, 3)
    shown = PMatrix.from_columns([(1, 0, 0, 0, 0), (-y, 1, 0, 0, 0), (-2 * x, 0, 1, 0, 0), (2 * z, 0, 0, 1, 0),
                                  (2 * z * y - 2 * x * x, -2 * z, 2 * x, y, 1)], F3)
    assert pgsp4_to_so5(_nprime(-x, -y, -z, F3)).equals(shown)
    assert pgsp4_to_so5(_nprime(x, y, z, F3)).inverse().equals(shown)
    assert build_n(-2 * z, 2 * x, y, 0, F3).equals(shown)
    # the character identity z - theta y -> -(x1 + 2 theta x3)/2
    theta = 2
    x1, x3 = -2 * z, y
    assert z - theta * y == -(x1 + 2 * theta * x3) / 2


# -- H = PGL(2) ---------------------------------------------------------------

def _reassemble(dec, F):
    return n_H(dec.x, F) @ diag_H(dec.t, F) @ dec.k


@pytest.mark.parametrize("entries", [
    [[1, 2], [3, 4]], [[Fraction(1, 3), 5], [9, 1]], [[0, 1], [-27, Fraction(-2, 9)]], [[5, 0], [0, 1]], [[0, 1], [-1, 0]],
])
def test_iwasawa_reassembles(entries, F3):
    g = MatrixH(entries, F3)
    dec = iwasawa_H(g)
    k = dec.k
    assert k.is_integral()
    assert k.det().valuation == 0
    h = _reassemble(dec, F3)
    # equal up to a scalar
    (a, b), (c, d) = g.rows
    (A, B), (C, D) = h.rows
    assert (a * D - A * d).is_zero and (b * C - B * c).is_zero and (a * B - A * b).is_zero


def test_phi_r_on_standard_elements(F3):
    x = F3(Fraction(2, 9))
    g = n_H(x, F3) @ diag_H(F3.pi_power(2), F3)
    assert eval_phi_r(2, g) == pytest.approx(psi_add(x).conjugate())
    assert eval_phi_r(1, g) == 0
    assert eval_phi_r(-1, g) == 0
