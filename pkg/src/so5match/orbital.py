"""Orbital integrals on G and H, their Mellin transforms, and the matching check.

G side.  For alpha = p^v u and the support box |x_i| <= q^B with B = r - v,
write x_i = j_i p^{-B}.  The condition Phi_r(n a_alpha gamma0 v0) = 1 becomes a
congruence modulo M = p^B between an integer built from (j1, j3) and j2^2,
and the character weight is e(./M).  The cell sum is evaluated exactly by
tabulating the (j1, j3) part by residue class, which turns an n^3 loop into
O(n^2) work with n = p^{B+L}.  A slow path builds each matrix with PadicNumber
arithmetic and classifies the orbit directly; the two are compared in tests.

H side.  Psi'(beta, phi'_r) is summed over shells of a with phi'_r evaluated
through the Iwasawa decomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

from .groups import NONSPLIT, SPLIT, MatrixH, classify_orbit, diag_H, eval_phi_r, n_H, orbit_point, standard_elements
from .harmonic import CaseTag
from .padic import CharacterSpec, PadicNumber, PrecisionError, Qp, hilbert_symbol, psi_add
from .symbolic import ClosedForm

STABILITY_TOL = 1e-9


class UnstableIntegral(RuntimeError):
    """Refining the plan changed the value by more than the tolerance."""


class BoundaryLeak(RuntimeError):
    """A boundary shell of the summation range contributed."""


@dataclass(frozen=True)
class IntegrationPlan:
    alpha: PadicNumber
    r: int
    case: CaseTag
    box_exponent: int
    cell_level: int
    shell_range: tuple = (0, 0)

    def refined(self) -> "IntegrationPlan":
        lo, hi = self.shell_range
        return IntegrationPlan(self.alpha, self.r, self.case, self.box_exponent, self.cell_level + 1, (lo - 1, hi + 1))


@dataclass
class Evaluation:
    value: complex
    cells: int
    delta: float = 0.0
    stable: bool = True


@dataclass
class CheckReport:
    check_id: str
    params: dict
    lhs: complex
    rhs: complex
    abs_err: float
    cells: int
    stable: bool
    tol: float
    status: str = field(init=False)

    def __post_init__(self):
        self.status = "pass" if (self.stable and self.abs_err <= self.tol) else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def make_report(check_id: str, params: dict, lhs, rhs, tol: float, cells: int = 0, stable: bool = True) -> CheckReport:
    lhs = complex(lhs)
    rhs = complex(rhs)
    err = abs(lhs - rhs)
    if not math.isfinite(err):
        err = float("inf")
    return CheckReport(check_id, dict(params), lhs, rhs, err, cells, stable, tol)


def _field(tag: CaseTag, precision: int = 24) -> Qp:
    return Qp(tag.p, precision)


def as_padic(alpha, tag: CaseTag) -> PadicNumber:
    return alpha if isinstance(alpha, PadicNumber) else _field(tag)(alpha)


# ---------------------------------------------------------------------------
# G side, reduced path

def _chunks(n: int, size: int = 512):
    for start in range(0, n, size):
        yield np.arange(start, min(n, start + size), dtype=np.int64)


@lru_cache(maxsize=64)
def _pair_table(p: int, case: str, theta: int, B: int, n: int) -> np.ndarray:
    """Residue table of 2 j1 j3 mod M over [0, n)^2 with the case weight.

    split:    H[t] = #{(j1, j3) : 2 j1 j3 = t}
    nonsplit: H[t] = sum over 2 j1 j3 = t of e((j1 + 2 theta j3)/M)
    """
    M = p**B
    j = np.arange(n, dtype=np.int64)
    if case == SPLIT:
        H = np.zeros(M, dtype=np.float64)
        for j1 in _chunks(n):
            key = (2 * j1[:, None] * j[None, :]) % M
            H += np.bincount(key.ravel(), minlength=M)
        return H.astype(np.complex128)
    H = np.zeros(M, dtype=np.complex128)
    w3 = np.exp(2j * np.pi * ((2 * theta * j) % M) / M)
    for j1 in _chunks(n):
        key = ((2 * j1[:, None] * j[None, :]) % M).ravel()
        w = (np.exp(2j * np.pi * (j1 % M) / M)[:, None] * w3[None, :]).ravel()
        H += np.bincount(key, weights=w.real, minlength=M) + 1j * np.bincount(key, weights=w.imag, minlength=M)
    return H


@lru_cache(maxsize=64)
def _square_table(p: int, case: str, B: int, n: int) -> np.ndarray:
    """S[t] = sum over j2 in [0, n) with j2^2 = t mod M of the j2-weight."""
    M = p**B
    j = np.arange(n, dtype=np.int64)
    key = (j * j) % M
    if case == SPLIT:
        w = np.exp(2j * np.pi * (j % M) / M)
        return np.bincount(key, weights=w.real, minlength=M) + 1j * np.bincount(key, weights=w.imag, minlength=M)
    return np.bincount(key, minlength=M).astype(np.complex128)


def _psi_G_reduced_value(u: int, v: int, r: int, case: str, p: int, theta: int, L: int) -> tuple:
    """(value, cells) for alpha = p^v u at cell level L."""
    B = r - v
    if B < 0:
        return 0j, 0
    if B == 0:
        # a single unit box; the congruence modulo 1 is vacuous
        n = p**L
        return complex(1.0), n**3
    M = p**B
    n = p ** (B + L)
    H = _pair_table(p, case, theta, B, n)
    S = _square_table(p, case, B, n)
    t = np.arange(M, dtype=np.int64)
    if case == SPLIT:
        c = (u * u * p ** (2 * r)) % M
        total = np.sum(S * H[(c - t) % M])
    else:
        c = (4 * theta * u * u * p ** (2 * r)) % M
        shift = np.exp(-2j * np.pi * ((2 * theta * u * p**r) % M) / M)
        total = shift * np.sum(S * H[(c - t) % M])
    return complex(total) / float(p ** (3 * L)), n**3


def default_plan(alpha, r: int, tag: CaseTag) -> IntegrationPlan:
    alpha = as_padic(alpha, tag)
    B = r - alpha.valuation
    return IntegrationPlan(alpha, r, tag, B, max(0, -B) + 1, (0, 0))


def _unit(alpha: PadicNumber, digits: int) -> int:
    return alpha.unit_residue(min(alpha.precision, digits))


def psi_G_eval(alpha, r: int, tag: CaseTag, plan: IntegrationPlan | None = None) -> Evaluation:
    """Psi(alpha, Phi_r) by the reduced path, with the L -> L+1 stability check."""
    plan = plan or default_plan(alpha, r, tag)
    alpha = plan.alpha
    if alpha.is_zero:
        raise ValueError("alpha must be non-zero")
    if r < 0:
        raise ValueError("r must be >= 0")
    v = alpha.valuation
    u = _unit(alpha, max(1, plan.box_exponent) + 2)
    a, ca = _psi_G_reduced_value(u, v, r, tag.variant, tag.p, tag.theta, plan.cell_level)
    b, cb = _psi_G_reduced_value(u, v, r, tag.variant, tag.p, tag.theta, plan.cell_level + 1)
    delta = abs(a - b)
    ev = Evaluation(a, ca + cb, delta, delta <= STABILITY_TOL * max(1.0, abs(a)))
    if not ev.stable:
        raise UnstableIntegral(f"psi_G changed by {delta:.3e} under refinement")
    return ev


def psi_G(alpha, r: int, tag: CaseTag, plan: IntegrationPlan | None = None) -> complex:
    return psi_G_eval(alpha, r, tag, plan).value


def psi_G_matrix(alpha, r: int, tag: CaseTag, level: int | None = None) -> Evaluation:
    """Slow path: enumerate (x1, x2, x3) cells, form n a_alpha gamma0 v0 by
    matrix arithmetic and classify the orbit."""
    F = _field(tag)
    alpha = as_padic(alpha, tag)
    E = standard_elements(tag.variant, F, tag.theta)
    B = r - alpha.valuation
    if B < 0:
        return Evaluation(0j, 0)
    L = max(0, -B) if level is None else level
    p = tag.p
    step = Fraction(p) ** (-B)
    pts = [F(j * step) for j in range(p ** (B + L))]
    meas = Fraction(1, p ** (3 * L))
    total = 0j
    cells = 0
    for x1 in pts:
        for x2 in pts:
            for x3 in pts:
                cells += 1
                s = orbit_point(x1, x2, x3, alpha, E)
                try:
                    k = classify_orbit(s)
                except PrecisionError:
                    raise
                if k <= r:
                    total += E.psi_N(x1, x2, x3)
    return Evaluation(total * float(meas), cells)


def psi_G_direct(alpha, r: int, tag: CaseTag, L: int = 0) -> complex:
    """Plain numpy triple loop over the same integer cells; used to check the
    residue tabulation on small boxes."""
    alpha = as_padic(alpha, tag)
    p, theta = tag.p, tag.theta
    v = alpha.valuation
    B = r - v
    if B < 0:
        return 0j
    M = p**B
    n = p ** (B + L)
    u = _unit(alpha, B + 2)
    j = np.arange(n, dtype=np.int64)
    j1, j2, j3 = np.meshgrid(j, j, j, indexing="ij")
    if tag.variant == SPLIT:
        cond = (u * u * p ** (2 * r) - 2 * j1 * j3 - j2 * j2) % M == 0
        w = np.exp(2j * np.pi * (j2 % M) / M)
    else:
        cond = (4 * theta * u * u * p ** (2 * r) - 2 * u * p**r * j1 - 2 * j1 * j3 - j2 * j2) % M == 0
        w = np.exp(2j * np.pi * ((j1 + 2 * theta * j3) % M) / M)
    return complex(np.sum(w[cond])) / p ** (3 * L)


# ---------------------------------------------------------------------------
# H side

def theta_symbol(alpha: PadicNumber, tag: CaseTag) -> int:
    """(theta, alpha); identically 1 in the split case."""
    if tag.variant == SPLIT:
        return 1
    return hilbert_symbol(Qp(tag.p)(tag.theta), alpha)


def iota(v_a: int, tag: CaseTag) -> int:
    """chi_0(a): the unramified quadratic character (chi_0(p) = -1) in the
    split case, trivial in the non-split case."""
    return (-1) ** (v_a % 2) if tag.variant == SPLIT else 1


def _units(p: int, depth: int) -> list:
    return [u for u in range(1, p**depth) if u % p]


def default_shell_range(r: int, v: int) -> tuple:
    w = r + 2 * abs(v) + 4
    return (-w, w)


def _psi_H_sum(alpha: PadicNumber, r: int, tag: CaseTag, lo: int, hi: int, depth: int) -> tuple:
    """Sum over shells |a| = q^s, s in [lo, hi], of phi'_r(w n(alpha) diag(a,1)) iota(a).

    Returns (total, value of the two boundary shells, cells)."""
    F = Qp(tag.p, alpha.precision)
    w = MatrixH([[0, 1], [-1, 0]], F)
    g0 = w @ n_H(alpha, F)
    units = _units(tag.p, depth)
    total = 0j
    boundary = 0.0
    cells = 0
    for s in range(lo, hi + 1):
        acc = 0j
        for u in units:
            a = PadicNumber(tag.p, -s, u, F.precision)
            acc += eval_phi_r(r, g0 @ diag_H(a, F))
            cells += 1
        acc = acc * iota(-s, tag) / len(units)
        total += acc
        if s in (lo, hi):
            boundary = max(boundary, abs(acc))
    return total, boundary, cells


def psi_H_reduced(alpha: PadicNumber, r: int, tag: CaseTag) -> complex:
    """Psi'(alpha, phi'_r) from the two Iwasawa branches of [[0, 1], [-a, -alpha]].

    With nu = v(a): if v(alpha) <= nu the torus part is a/alpha^2 and the
    unipotent part -1/alpha, otherwise they are 1/a and 0.  The condition
    v(t) = r then picks out one a-shell in each branch, and the integrand is
    constant on it.
    """
    if r < 0:
        return 0j
    v = alpha.valuation
    total = 0j
    if r + v >= 0:
        total += iota(r + 2 * v, tag) * psi_add(1 / alpha)
    if -r < v:
        total += iota(-r, tag)
    return complex(total)


def psi_H_eval(alpha, r: int, tag: CaseTag, shell_range: tuple | None = None, depth: int = 1,
               method: str = "reduced") -> Evaluation:
    """Psi'(alpha, phi'_r) = int phi'_r(w n(alpha) diag(a, 1)) iota(a) d^x a.

    ``method="matrix"`` sums shells of a with the Iwasawa decomposition done in
    PadicNumber matrix arithmetic and checks boundary shells and refinement.
    """
    alpha = as_padic(alpha, tag)
    if alpha.is_zero:
        raise ValueError("alpha must be non-zero")
    if r < 0:
        return Evaluation(0j, 0)
    if method == "reduced":
        return Evaluation(psi_H_reduced(alpha, r, tag), 2)
    if method != "matrix":
        raise ValueError(f"unknown method {method!r}")
    lo, hi = shell_range or default_shell_range(r, alpha.valuation)
    a, ba, ca = _psi_H_sum(alpha, r, tag, lo, hi, depth)
    if ba > 1e-12:
        raise BoundaryLeak(f"boundary shell of [{lo}, {hi}] contributes {ba:.3e}")
    b, bb, cb = _psi_H_sum(alpha, r, tag, lo - 1, hi + 1, depth + 1)
    delta = abs(a - b)
    if delta > STABILITY_TOL:
        raise UnstableIntegral(f"psi_H changed by {delta:.3e} under refinement")
    return Evaluation(a, ca + cb, delta, True)


def psi_H(alpha, r: int, tag: CaseTag, shell_range: tuple | None = None, method: str = "reduced") -> complex:
    return psi_H_eval(alpha, r, tag, shell_range, method=method).value


# ---------------------------------------------------------------------------
# shell integrals and Gauss sums

def _chi_unit(chi: CharacterSpec, u: int) -> complex:
    return chi.unit_value(u) if chi.conductor else 1.0


def _pi_factor(chi: CharacterSpec, k: int, X: complex | None) -> complex:
    """chi(p^{-k})."""
    if chi.value_at_pi is not None:
        return complex(chi.value_at_pi) ** (-k)
    if X is None:
        raise ValueError("a numeric X is needed")
    return complex(X) ** k


def shell_integral(k: int, x, chi: CharacterSpec, weight: int, X: complex | None = None):
    """int_{|alpha| = q^k} |alpha|^w psi(alpha x) chi(alpha) d^x alpha.

    For an unramified character with symbolic value and X=None, returns the
    ClosedForm c X^k with c recovered as an exact rational."""
    p = chi.p
    x = x if isinstance(x, PadicNumber) else Qp(p)(x)
    if x.is_zero:
        raise ValueError("x must be non-zero")
    depth = max(1, chi.conductor, k - x.valuation)
    units = _units(p, depth)
    acc = 0j
    for u in units:
        a = PadicNumber(p, -k, u, max(24, depth + 2))
        acc += psi_add(a * x) * _chi_unit(chi, u)
    avg = acc / len(units)
    scale = Fraction(p) ** (weight * k)
    if chi.value_at_pi is None and not chi.ramified and X is None:
        # the unit sum is an integer (a Ramanujan sum); recover it exactly
        n = round(acc.real)
        if abs(acc - n) > 1e-8:
            raise ArithmeticError("unit sum is not an integer")
        return ClosedForm.monomial(k, scale * Fraction(n, len(units)), p)
    return avg * float(scale) * _pi_factor(chi, k, X)


def lemma_shell_closed(k: int, vx: int, weight: int, q: int) -> ClosedForm:
    """Three-case closed form of the unramified shell integral with |x| = q^{-vx}."""
    l = k - vx
    if l >= 2:
        return ClosedForm({}, q)
    mono = ClosedForm.monomial(k, Fraction(q) ** (weight * k), q)
    if l == 1:
        return mono * Fraction(-1, q - 1)
    return mono


def gauss_tau(chi: CharacterSpec) -> complex:
    """tau(psi, chi) = int_{|x| = q^m} psi(x) chi(x) d^x x."""
    if not chi.ramified:
        raise ValueError("gauss_tau needs a ramified character")
    if chi.value_at_pi is None:
        raise ValueError("gauss_tau needs a concrete value at p")
    p, m = chi.p, chi.conductor
    units = _units(p, m + 1)
    acc = 0j
    for u in units:
        acc += psi_add(PadicNumber(p, -m, u, m + 4)) * chi.unit_value(u)
    return acc / len(units) * complex(chi.value_at_pi) ** (-m)


# ---------------------------------------------------------------------------
# Mellin transforms

def _key(tag: CaseTag) -> tuple:
    return (tag.variant, tag.p, tag.theta)


def _shell_depth(l: int, chi: CharacterSpec, extra: int) -> int:
    return max(1, chi.conductor, l) + extra


@lru_cache(maxsize=256)
def _profile_H(r: int, key: tuple, chi: CharacterSpec, lo: int, hi: int, extra: int) -> tuple:
    """Per-shell sums sum_u (theta,alpha) psi(alpha) chi_u(u) |alpha| Psi'(1/alpha) / #u,
    alpha = p^{-l} u."""
    tag = CaseTag(*key, {})
    p = tag.p
    prof = {}
    cells = 0
    for l in range(lo, hi + 1):
        depth = _shell_depth(l, chi, extra)
        units = _units(p, depth)
        acc = 0j
        for u in units:
            alpha = PadicNumber(p, -l, u, 24)
            beta = 1 / alpha
            val = psi_H_eval(beta, r, tag).value if r >= 0 else 0j
            cells += 1
            if val == 0:
                continue
            acc += theta_symbol(alpha, tag) * psi_add(alpha) * _chi_unit(chi, u) * float(p) ** l * val
        prof[l] = acc / len(units)
    return tuple(sorted(prof.items())), cells


def _mellin_from_profile(prof: tuple, chi: CharacterSpec, X: complex | None) -> tuple:
    """(value, scale) with scale the sum of term magnitudes, for the relative tolerance."""
    terms = [c * _pi_factor(chi, l, X) for l, c in prof]
    return sum(terms, 0j), sum(abs(t) for t in terms)


def mellin_H_eval(r: int, chi: CharacterSpec, tag: CaseTag, X: complex | None = None,
                  shell_range: tuple | None = None) -> Evaluation:
    """Brute-force Mellin transform of the H-side orbital integral of phi'_r."""
    if r < 0:
        return Evaluation(0j, 0)
    lo, hi = shell_range or (-r - 2, max(3, chi.conductor + 2))
    prof, cells = _profile_H(r, _key(tag), chi, lo, hi, 0)
    edge = max(abs(c) for l, c in prof if l in (lo, hi))
    if edge > 1e-10:
        raise BoundaryLeak(f"mellin_H boundary shell contributes {edge:.3e}")
    prof2, cells2 = _profile_H(r, _key(tag), chi, lo - 1, hi + 1, 1)
    a, scale = _mellin_from_profile(prof, chi, X)
    b, _ = _mellin_from_profile(prof2, chi, X)
    delta = abs(a - b)
    if delta > STABILITY_TOL * max(1.0, scale):
        raise UnstableIntegral(f"mellin_H changed by {delta:.3e} under refinement")
    return Evaluation(a, cells + cells2, delta, True)


def mellin_H(r: int, chi: CharacterSpec, tag: CaseTag, X: complex | None = None) -> complex:
    return mellin_H_eval(r, chi, tag, X).value


@lru_cache(maxsize=256)
def _profile_G(r: int, key: tuple, chi: CharacterSpec, lo: int, hi: int, extra: int) -> tuple:
    """Per-shell sums sum_u Psi(p^{-l} u, Phi_r) chi_u(u) / #u."""
    tag = CaseTag(*key, {})
    p = tag.p
    prof = {}
    cells = 0
    for l in range(lo, hi + 1):
        depth = _shell_depth(l, chi, extra)
        units = _units(p, depth)
        acc = 0j
        for u in units:
            val, c = _psi_G_reduced_value(u, -l, r, tag.variant, p, tag.theta, 1 + extra)
            cells += c
            acc += val * _chi_unit(chi, u)
        prof[l] = acc / len(units)
    return tuple(sorted(prof.items())), cells


def mellin_G_eval(r: int, chi: CharacterSpec, tag: CaseTag, X: complex | None = None,
                  shell_range: tuple | None = None) -> Evaluation:
    """int Psi(alpha, Phi_r) chi(alpha) d^x alpha, summed shell by shell in alpha.

    The inner x-integral is taken in the original coordinates; substituting
    x_i -> alpha x_i turns it into the integral over the fixed box |x_i| <= q^r
    with the factor |alpha|^3, so both describe the same sum.  Shells below
    |alpha| = q^{-r} vanish identically.
    """
    lo, hi = shell_range or (-r - 1, max(3, chi.conductor + 2))
    prof, cells = _profile_G(r, _key(tag), chi, lo, hi, 0)
    edge = max(abs(c) for l, c in prof if l in (lo, hi))
    if edge > 1e-10:
        raise BoundaryLeak(f"mellin_G boundary shell contributes {edge:.3e}")
    prof2, cells2 = _profile_G(r, _key(tag), chi, lo - 1, hi + 1, 1)
    a, scale = _mellin_from_profile(prof, chi, X)
    b, _ = _mellin_from_profile(prof2, chi, X)
    delta = abs(a - b)
    if delta > STABILITY_TOL * max(1.0, scale):
        raise UnstableIntegral(f"mellin_G changed by {delta:.3e} under refinement")
    return Evaluation(a, cells + cells2, delta, True)


def mellin_G(r: int, chi: CharacterSpec, tag: CaseTag, X: complex | None = None) -> complex:
    return mellin_G_eval(r, chi, tag, X).value


# closed forms ---------------------------------------------------------------

def mellin_H_closed(r: int, q: int, s: int, X: complex) -> complex:
    """(-1)^r (qX)^{-r} (1 + s qX)/(1 - s qX) + (-s)^{r-1} 2 q^2 X (1 - sX)/((q-1)(1 - s qX))."""
    X = complex(X)
    first = (-1) ** r * (q * X) ** (-r) * (1 + s * q * X) / (1 - s * q * X)
    second = (-s) ** (r - 1) * 2 * q * q * X * (1 - s * X) / ((q - 1) * (1 - s * q * X))
    return first + second


def mellin_H_ramified_stated(r: int, chi: CharacterSpec) -> complex:
    """2 (-1)^r q^m tau(psi, chi)."""
    return 2 * (-1) ** r * chi.p**chi.conductor * gauss_tau(chi)


def mellin_H_ramified_corrected(r: int, chi: CharacterSpec, case: str) -> complex:
    """eps q^m tau(psi, chi) (1 + chi(2)^{-1}), eps = (-1)^r split, (-1)^m non-split.

    The two terms come from the two support regions of the a-integral; in
    the second one the integrand carries psi(alpha)^2 = psi(2 alpha)."""
    m = chi.conductor
    eps = (-1) ** r if case == SPLIT else (-1) ** m
    return eps * chi.p**m * gauss_tau(chi) * (1 + 1 / chi.unit_value(2))


def mellin_combination_closed(r: int, q: int, s: int, X: complex) -> complex:
    """X^{-r} + s q X^{1-r}."""
    X = complex(X)
    return X ** (-r) + s * q * X ** (1 - r)


def mellin_G_closed(r: int, q: int, case: str, X: complex) -> complex:
    X = complex(X)
    if case == SPLIT:
        return q * X ** (1 - r) + X ** (-r)
    return X ** (-r) - q * X ** (1 - r)


def mellin_H_combination(r: int, chi: CharacterSpec, tag: CaseTag, X: complex | None = None) -> Evaluation:
    """(-1)^r q^r (hat Psi'_r + s hat Psi'_{r-1}) with the resolved transfer sign."""
    s = tag.sign("transfer")
    a = mellin_H_eval(r, chi, tag, X)
    b = mellin_H_eval(r - 1, chi, tag, X)
    val = (-1) ** r * tag.q**r * (a.value + s * b.value)
    return Evaluation(val, a.cells + b.cells, max(a.delta, b.delta), True)


# ---------------------------------------------------------------------------
# matching

def matching_sides(alpha, r: int, tag: CaseTag, s: int | None = None) -> tuple:
    """(lhs, rhs, cells) of Psi(alpha, Phi_r) = (theta, alpha) psi(alpha) |alpha|
    Psi'(1/alpha, (-1)^r q^r (phi'_r + s phi'_{r-1}))."""
    alpha = as_padic(alpha, tag)
    s = tag.sign("matching") if s is None else s
    g = psi_G_eval(alpha, r, tag)
    beta = 1 / alpha
    h1 = psi_H_eval(beta, r, tag)
    h0 = psi_H_eval(beta, r - 1, tag)
    factor = theta_symbol(alpha, tag) * psi_add(alpha) * float(alpha.abs())
    rhs = factor * (-1) ** r * tag.q**r * (h1.value + s * h0.value)
    return g.value, rhs, g.cells + h1.cells + h0.cells


def verify_matching(alpha, r: int, tag: CaseTag, tol: float = 1e-6) -> CheckReport:
    alpha = as_padic(alpha, tag)
    params = {"case": tag.variant, "r": r, "alpha": str(alpha.to_fraction()), "v": alpha.valuation}
    try:
        lhs, rhs, cells = matching_sides(alpha, r, tag)
        stable = True
    except (UnstableIntegral, BoundaryLeak, PrecisionError):
        lhs, rhs, cells, stable = complex("nan"), complex("nan"), 0, False
    return make_report(f"matching/{tag.variant}/r{r}/{alpha.to_fraction()}", params, lhs, rhs, tol, cells, stable)
