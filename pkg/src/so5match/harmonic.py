"""Spherical side: volumes, Hecke orbit scans, T_r, Satake value, Whittaker
function, the G-side pairing and the transfer map.

Closed forms that carry a sign ambiguity take an explicit ``s`` in {+1, -1};
which value is right for a given case is decided in ``signs`` against the
enumerations below, and recorded on a ``CaseTag``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .groups import CASES, NONSPLIT, SPLIT, classify_orbit, coset_lifts, standard_elements, PIECES
from .groups import MatrixH, diag_H, eval_phi_r
from .padic import Qp, smallest_nonresidue
from .symbolic import ClosedForm, QSqrtRational, iterate_recursion


@dataclass(frozen=True)
class CaseTag:
    variant: str
    p: int
    theta: int
    resolved_signs: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in CASES:
            raise ValueError(f"unknown case {self.variant!r}")

    @property
    def q(self) -> int:
        return self.p

    def sign(self, site: str) -> int:
        try:
            return self.resolved_signs[site]
        except KeyError:
            raise LookupError(f"sign site {site!r} is unresolved for the {self.variant} case") from None


def default_theta(p: int) -> int:
    return smallest_nonresidue(p)


# ---------------------------------------------------------------------------
# finite-field counts

EQUATIONS = ("z_eq_0", "two_x1x3_plus_x2sq_eq_1", "two_x1_1px3_plus_x2sq_eq_4theta", "x1_minus_half_x4sq_eq_0")


def count_fq(equation: str, p: int, theta: int | None = None) -> int:
    half = pow(2, -1, p)
    th = default_theta(p) if theta is None else theta
    R = range(p)
    if equation == "z_eq_0":
        return sum(1 for a in R for b in R for c in R
                   if (a, b, c) != (0, 0, 0) and (-a * c - b * b * half) % p == 0)
    if equation == "two_x1x3_plus_x2sq_eq_1":
        return sum(1 for a in R for b in R for c in R if (2 * a * c + b * b - 1) % p == 0)
    if equation == "two_x1_1px3_plus_x2sq_eq_4theta":
        return sum(1 for a in R for b in R for c in R if (2 * a * (1 + c) + b * b - 4 * th) % p == 0)
    if equation == "x1_minus_half_x4sq_eq_0":
        return sum(1 for a in R for d in R if (a - d * d * half) % p == 0)
    raise ValueError(f"unknown equation {equation!r}")


# ---------------------------------------------------------------------------
# Hecke orbit scan

@lru_cache(maxsize=None)
def hecke_orbit_scan(r: int, case: str, p: int, theta: int | None = None, precision: int = 24) -> dict:
    """Orbit histogram of b n d_r v1 over the pieces of K b1 K.

    Returns {piece: Counter(orbit index -> multiplicity), "total": Counter}.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    F = Qp(p, precision)
    E = standard_elements(case, F, theta)
    start = E.d(r) @ E.v1
    out = {}
    total = Counter()
    for name in PIECES:
        b, ns = coset_lifts_cached(p, precision)[name]
        hist = Counter()
        for _, n, _ in ns:
            s = b @ (n @ start)
            hist[classify_orbit(s)] += 1
        out[name] = hist
        total.update(hist)
    out["total"] = total
    return out


@lru_cache(maxsize=None)
def coset_lifts_cached(p: int, precision: int = 24) -> dict:
    return coset_lifts(Qp(p, precision))


def scan_total(r: int, case: str, p: int, theta: int | None = None) -> Counter:
    return hecke_orbit_scan(r, case, p, theta)["total"]


# ---------------------------------------------------------------------------
# volumes

def hecke_degree(q: int) -> int:
    return q**3 + q**2 + q + 1


def lambda_closed(r: int, q: int, s: int) -> Fraction:
    """Lambda_r = q^{3r} (1 + s q^{-2}) for r >= 1, Lambda_0 = 1."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return Fraction(1)
    return Fraction(q) ** (3 * r) * (1 + s * Fraction(1, q * q))


def lambda_from_scan(rmax: int, case: str, p: int, theta: int | None = None) -> list:
    """Volumes solved from the measure balance of K b1 K acting on orbits.

    Each point of orbit i has hist_i(j) translates in orbit j, so counting
    pairs two ways gives sum_i Lambda_i hist_i(r) = deg * Lambda_r.  The
    equation at r involves orbits up to r+1 and is solved for Lambda_{r+1}.
    """
    q = p
    lam = [Fraction(1)]
    hists = [scan_total(i, case, p, theta) for i in range(rmax + 2)]
    for r in range(rmax):
        known = sum(lam[i] * hists[i].get(r, 0) for i in range(len(lam)))
        top = hists[r + 1].get(r, 0)
        if top == 0:
            raise ArithmeticError(f"orbit {r + 1} never reaches orbit {r}")
        lam.append((hecke_degree(q) * lam[r] - known) / top)
    return lam


def volume_balance(r: int, lam: list, case: str, p: int, theta: int | None = None) -> tuple:
    """(sum_i Lambda_i hist_i(r), deg * Lambda_r) over orbits i <= r+2."""
    lhs = sum(lam[i] * scan_total(i, case, p, theta).get(r, 0) for i in range(min(len(lam), r + 3)))
    return lhs, hecke_degree(p) * lam[r]


def lambda_recursion(rmax: int, seeds: tuple) -> list:
    """Lambda_{r+1} = (1+q^3) Lambda_r - q^3 Lambda_{r-1} for r >= 2, from
    seeds (q, Lambda_0, Lambda_1, Lambda_2)."""
    q, l0, l1, l2 = seeds
    lam = [Fraction(l0), Fraction(l1), Fraction(l2)]
    while len(lam) <= rmax:
        lam.append((1 + q**3) * lam[-1] - q**3 * lam[-2])
    return lam[: rmax + 1]


def lambda_vol(r: int, tag: CaseTag) -> Fraction:
    """Closed-form volume, cross-checked against the recursion path."""
    if r < 0:
        raise ValueError("r must be >= 0")
    s = tag.sign("volume")
    q = tag.q
    closed = lambda_closed(r, q, s)
    seeds = lambda_from_scan(2, tag.variant, tag.p, tag.theta)
    rec = lambda_recursion(max(r, 2), (q, *seeds))[r]
    if rec != closed:
        raise ArithmeticError(f"volume closed form {closed} disagrees with recursion {rec} at r={r}")
    return closed


# ---------------------------------------------------------------------------
# Satake value of f1 and the modular character

def satake_f1(q: int, offset: Fraction = Fraction(1, 2)) -> ClosedForm:
    """q^{3/2}(q^z + q^{z'-z} + q^{z-z'} + q^{-z}) with X = q^z and z' = z + offset.

    ``offset`` must be a half-integer so that q^{offset} lies in Q(sqrt q).
    """
    two = 2 * Fraction(offset)
    if two.denominator != 1:
        raise ValueError("offset must be a half-integer")
    c = QSqrtRational.q_power(int(two), q)
    ci = QSqrtRational.q_power(-int(two), q)
    inner = ClosedForm({1: 1, -1: 1}, q) + ClosedForm.const(c + ci, q)
    return inner * QSqrtRational.q_power(3, q)


def satake_numeric(zeta: complex, zeta_p: complex, q: int) -> complex:
    return q**1.5 * (q**zeta + q ** (zeta_p - zeta) + q ** (zeta - zeta_p) + q ** (-zeta))


# positive roots of B2 as exponent vectors on diag(a, b, 1, 1/b, 1/a)
POSITIVE_ROOTS = ((1, -1), (0, 1), (1, 0), (1, 1))


def delta_B(va: int, vb: int, q: int) -> Fraction:
    """Modulus character at diag(a, b, 1, 1/b, 1/a) with v(a)=va, v(b)=vb."""
    total = sum(e1 * va + e2 * vb for e1, e2 in POSITIVE_ROOTS)
    return Fraction(q) ** (-total)


# diagonal data (v(a), v(b)) of the four piece representatives
PIECE_DIAG = {"Kb1N1": (-1, 0), "Kb2N2": (0, -1), "Kb2invN3": (0, 1), "Kb1inv": (1, 0)}


def satake_from_cosets(q: int) -> ClosedForm:
    """sum over pieces of delta_B(b)^{-1/2} |N_i| |a1(b)|^z |a2(b)|^{z'}, with
    z' = z + 1/2 and simple roots a1 = a/b, a2 = b."""
    sizes = {name: len(ns) for name, (_, ns) in coset_lifts_cached(q).items()}
    out = ClosedForm({}, q)
    for name, (va, vb) in PIECE_DIAG.items():
        d = delta_B(va, vb, q)
        # delta_B is an integer power of q; its inverse square root lies in Q(sqrt q)
        k = 0
        while Fraction(q) ** k != d:
            k += 1 if Fraction(q) ** k < d else -1
        weight = QSqrtRational.q_power(-k, q) * sizes[name]
        e1 = -(va - vb)     # |a1(b)|^z = X^{-v(a1)}
        e2 = -vb            # |a2(b)|^{z'} = X^{-vb} q^{-vb/2}
        out = out + ClosedForm.monomial(e1 + e2, weight * QSqrtRational.q_power(e2, q), q)
    return out


# ---------------------------------------------------------------------------
# spherical function T_r

def _eigen_recursion(q: int) -> tuple:
    A = ClosedForm.const(q**3, q)
    B = -(ClosedForm({1: 1, -1: 1}, q) * QSqrtRational.q_power(3, q))
    C = ClosedForm.const(1, q)
    return A, B, C


def T1_formula(q: int, s: int) -> ClosedForm:
    """(q^{3/2}(X + 1/X) + s q - 1) / (q^3 + s q)."""
    num = ClosedForm({1: 1, -1: 1}, q) * QSqrtRational.q_power(3, q) + (s * q - 1)
    return num / (q**3 + s * q)


def T_closed(r: int, q: int, s: int) -> ClosedForm:
    """c1 l1^r + c2 l2^r with l_{1,2} = q^{-3/2} X^{+-1}, the coefficients
    carrying the factor (1 + s q^{-1/2} X^{-+1})."""
    if r < 0:
        raise ValueError("r must be >= 0")
    X = ClosedForm.X(q)
    Xi = ClosedForm.monomial(-1, 1, q)
    q32 = QSqrtRational.q_power(3, q)
    qm12 = QSqrtRational.q_power(-1, q)
    lam = QSqrtRational.q_power(-3 * r, q)
    D = q32 + s * qm12
    num = ((X * q32 - 1) * (Xi * (s * qm12) + 1) * X**r
           - (Xi * q32 - 1) * (X * (s * qm12) + 1) * Xi**r) * lam
    return num.exact_div(X - Xi) / ClosedForm.const(D, q)


def T_recursion(r: int, q: int, T1: ClosedForm) -> ClosedForm:
    return iterate_recursion(_eigen_recursion(q), ClosedForm.const(1, q), T1, r)


@lru_cache(maxsize=None)
def T_from_scan(rmax: int, case: str, p: int, theta: int | None = None) -> tuple:
    """Solve the eigen-equation sum_i hist_r(i) T_i = f1 T_r upward from T_0 = 1."""
    q = p
    sat = satake_f1(q)
    T = [ClosedForm.const(1, q)]
    for r in range(rmax):
        h = scan_total(r, case, p, theta)
        rest = sum((T[i] * h.get(i, 0) for i in range(r + 1)), ClosedForm({}, q))
        top = h.get(r + 1, 0)
        T.append((sat * T[r] - rest) / top)
    return tuple(T)


def eigen_residual(r: int, T: list, case: str, p: int, X0: complex, theta: int | None = None) -> float:
    h = scan_total(r, case, p, theta)
    lhs = sum(h[i] * T[i](X0) for i in h)
    return abs(lhs - satake_f1(p)(X0) * T[r](X0))


def spherical_T(r: int, tag: CaseTag) -> ClosedForm:
    q = tag.q
    closed = T_closed(r, q, tag.sign("spherical"))
    rec = T_recursion(r, q, T1_formula(q, tag.sign("T1")))
    if closed != rec:
        raise ArithmeticError(f"spherical function closed form disagrees with recursion at r={r}")
    return closed


# ---------------------------------------------------------------------------
# Whittaker function and pairings

def chebyshev_S(k: int, q: int) -> ClosedForm:
    """(X^{k+1} - X^{-k-1}) / (X - X^{-1}); zero for k < 0."""
    if k < 0:
        return ClosedForm({}, q)
    return ClosedForm({j: 1 for j in range(-k, k + 1, 2)}, q)


def whittaker_W(r: int, q: int) -> ClosedForm:
    """W(diag(pi^r, 1)) = (-1)^r q^{-r/2} S_r(X); zero for r < 0."""
    if r < 0:
        return ClosedForm({}, q)
    num = ClosedForm({r + 1: 1, -(r + 1): 1 * -1}, q)
    S = num.exact_div(ClosedForm({1: 1, -1: -1}, q))
    return S * ((-1) ** r * QSqrtRational.q_power(-r, q))


def whittaker_pairing(k: int, q: int, span: int = 3) -> ClosedForm:
    """int phi'_k(a) W(a) |a|^{-1} d^x a as a sum over shells of a."""
    F = Qp(q)
    out = ClosedForm({}, q)
    for v in range(k - span, k + span + 1):
        val = eval_phi_r(k, diag_H(F.pi_power(v), F))
        if abs(val) < 1e-12:
            continue
        if abs(val - 1) > 1e-12:
            raise ArithmeticError("phi'_k is not real on the diagonal")
        out = out + whittaker_W(v, q) * q**v
    return out


def pairing_closed(r: int, q: int, s: int) -> ClosedForm:
    """q^r [ q^{r/2} S_r + s q^{(r-1)/2} S_{r-1} ]."""
    a = chebyshev_S(r, q) * QSqrtRational.q_power(r, q)
    b = chebyshev_S(r - 1, q) * (s * QSqrtRational.q_power(r - 1, q))
    return (a + b) * q**r


def pairing_sum(r: int, T: list, lam: list, q: int) -> ClosedForm:
    return sum((T[k] * lam[k] for k in range(r + 1)), ClosedForm({}, q))


def pairing_G(r: int, tag: CaseTag) -> ClosedForm:
    q = tag.q
    closed = pairing_closed(r, q, tag.sign("pairing"))
    T = [spherical_T(k, tag) for k in range(r + 1)]
    lam = [lambda_vol(k, tag) for k in range(r + 1)]
    direct = pairing_sum(r, T, lam, q)
    if direct != closed:
        raise ArithmeticError(f"pairing closed form disagrees with the direct sum at r={r}")
    return closed


def transfer_coefficients(r: int, q: int, s: int) -> dict:
    """F(Phi_r) = (-1)^r q^r (phi'_r + s phi'_{r-1}) as {index: coefficient}."""
    c = (-1) ** r * q**r
    out = {r: c}
    if r >= 1:
        out[r - 1] = s * c
    return out


def transfer_F(r: int, tag: CaseTag) -> dict:
    q = tag.q
    coeffs = transfer_coefficients(r, q, tag.sign("transfer"))
    lhs = pairing_G(r, tag)
    rhs = sum((whittaker_pairing(k, q) * c for k, c in coeffs.items()), ClosedForm({}, q))
    if lhs != rhs:
        raise ArithmeticError(f"transfer identity fails at r={r}")
    return coeffs
