"""Matrices for G = SO(J) (5x5), H = PGL(2) and the map from PGSp(4)."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .padic import EXACT_ZERO, PadicNumber, PrecisionError, Qp, psi_add

SPLIT = "split"
NONSPLIT = "nonsplit"
CASES = (SPLIT, NONSPLIT)


def _lift(F: Qp, x) -> PadicNumber:
    return x if isinstance(x, PadicNumber) else F(x)


def _vmin(x: PadicNumber) -> int:
    """Lower bound for the valuation (exact for non-zero values)."""
    return x.valuation


def _is_integral(x: PadicNumber) -> bool:
    if x.is_zero:
        if x.valuation < 0:
            raise PrecisionError("cannot decide integrality of an imprecise zero")
        return True
    return x.valuation >= 0


class PMatrix:
    """A small dense matrix of PadicNumber, stored row-major."""

    __slots__ = ("rows", "F")

    def __init__(self, rows: Sequence[Sequence], F: Qp):
        self.F = F
        self.rows = tuple(tuple(_lift(F, x) for x in row) for row in rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int, F: Qp):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], F)

    @classmethod
    def diag(cls, entries: Sequence, F: Qp):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], F)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], F: Qp):
        n = len(cols)
        return cls([[cols[j][i] for j in range(n)] for i in range(len(cols[0]))], F)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def _same(self, rows):
        return type(self)(rows, self.F)

    def __matmul__(self, other):
        if isinstance(other, PMatrix):
            cols = list(zip(*other.rows))
            out = []
            for row in self.rows:
                out.append([_dot(row, c) for c in cols])
            return self._same(out) if type(self) is type(other) else PMatrix(out, self.F)
        # vector
        vec = [_lift(self.F, x) for x in other]
        return [_dot(row, vec) for row in self.rows]

    def transpose(self):
        return self._same(list(zip(*self.rows)))

    def scale(self, c):
        c = _lift(self.F, c)
        return self._same([[x * c for x in row] for row in self.rows])

    def equals(self, other) -> bool:
        return all(a.equals(b) for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def is_integral(self) -> bool:
        return all(_is_integral(x) for row in self.rows for x in row)

    def det(self) -> PadicNumber:
        m = [list(r) for r in self.rows]
        n = len(m)
        det = self.F(1)
        for c in range(n):
            piv = None
            for i in range(c, n):
                if not m[i][c].is_zero and (piv is None or m[i][c].valuation < m[piv][c].valuation):
                    piv = i
            if piv is None:
                return self.F(0) * 0
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                det = -det
            det = det * m[c][c]
            for i in range(c + 1, n):
                if not m[i][c].is_zero:
                    f = m[i][c] / m[c][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return det

    def inverse(self):
        """Gauss-Jordan inverse with valuation pivoting."""
        n = self.n
        one, zero = self.F(1), self.F(0)
        m = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            piv = None
            for i in range(c, n):
                if not m[i][c].is_zero and (piv is None or m[i][c].valuation < m[piv][c].valuation):
                    piv = i
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            m[c], m[piv] = m[piv], m[c]
            inv = one / m[c][c]
            m[c] = [x * inv for x in m[c]]
            for i in range(n):
                if i != c and not m[i][c].is_zero:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return self._same([row[n:] for row in m])

    def to_fractions(self):
        return [[x.to_fraction() for x in row] for row in self.rows]

    def __repr__(self):
        return f"{type(self).__name__}({self.to_fractions()})"


def _dot(row, col) -> PadicNumber:
    acc = None
    for a, b in zip(row, col):
        if a.is_zero and a.valuation >= EXACT_ZERO or b.is_zero and b.valuation >= EXACT_ZERO:
            continue
        t = a * b
        acc = t if acc is None else acc + t
    if acc is None:
        return PadicNumber.zero(row[0].p)
    return acc


# ---------------------------------------------------------------------------
# G = SO(J)

def J_matrix(F: Qp) -> PMatrix:
    return PMatrix([[1 if i + j == 4 else 0 for j in range(5)] for i in range(5)], F)


class MatrixG(PMatrix):
    """An element of SO(J) in GL(5)."""

    def inverse(self):
        J = J_matrix(self.F)
        return MatrixG((J @ self.transpose() @ J).rows, self.F)

    def preserves_form(self) -> bool:
        J = J_matrix(self.F)
        return (self.transpose() @ J @ self).equals(J)

    def in_G(self) -> bool:
        return self.preserves_form() and self.det().equals(1)

    def in_K(self) -> bool:
        return self.is_integral()


def quad_form(v: Sequence[PadicNumber]) -> PadicNumber:
    """Q(v, v) = 2 v1 v5 + 2 v2 v4 + v3^2."""
    return 2 * v[0] * v[4] + 2 * v[1] * v[3] + v[2] * v[2]


@dataclass(frozen=True)
class SpherePoint:
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 5:
            raise ValueError("a sphere point has five coordinates")

    def Q(self) -> PadicNumber:
        return quad_form(self.coords)


def build_n(x1, x2, x3, x4, F: Qp | None = None) -> MatrixG:
    """The unipotent n(x1, x2, x3, x4) of N."""
    if F is None:
        F = Qp(x1.p, x1.precision or 24)
    x1, x2, x3, x4 = (_lift(F, x) for x in (x1, x2, x3, x4))
    half = Fraction(1, 2)
    z = -x1 * x3 - x2 * x2 * half
    x3p = -x3
    x2p = x3 * x4 - x2
    x1p = -x2 * x4 + x3 * x4 * x4 * half - x1
    cols = [
        (1, 0, 0, 0, 0),
        (x3p, 1, 0, 0, 0),
        (x2p, -x4, 1, 0, 0),
        (x1p, -x4 * x4 * half, x4, 1, 0),
        (z, x1, x2, x3, 1),
    ]
    return MatrixG(PMatrix.from_columns(cols, F).rows, F)


def _diagG(entries, F) -> MatrixG:
    return MatrixG(PMatrix.diag(entries, F).rows, F)


@dataclass
class StandardElements:
    case: str
    F: Qp
    theta: PadicNumber
    gamma0: MatrixG
    v0: tuple
    v1: tuple
    b1: MatrixG
    b2: MatrixG
    w: "MatrixH"
    Qvalue: PadicNumber

    def a(self, alpha) -> MatrixG:
        alpha = _lift(self.F, alpha)
        return _diagG([alpha, 1, 1, 1, 1 / alpha], self.F)

    def d(self, r: int) -> MatrixG:
        pr = self.F.pi_power(r)
        return _diagG([pr, 1, 1, 1, self.F.pi_power(-r)], self.F)

    def psi_N(self, x1, x2, x3) -> complex:
        x1, x2, x3 = (_lift(self.F, x) for x in (x1, x2, x3))
        if self.case == SPLIT:
            return psi_add(x2)
        return psi_add(x1 + 2 * self.theta * x3)


def standard_elements(case: str, F: Qp, theta: int | None = None) -> StandardElements:
    from .padic import smallest_nonresidue
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    th = F(1) if case == SPLIT else F(theta if theta is not None else smallest_nonresidue(F.p))
    q = Fraction
    if case == SPLIT:
        v0 = (0, 0, 1, 0, 0)
        v1 = (q(1, 2), 0, 0, 0, 1)
        cols = [(q(1, 2), 0, -1, 0, -1), (0, 1, 0, 0, 0), (q(1, 2), 0, 0, 0, 1),
                (0, 0, 0, 1, 0), (q(-1, 4), 0, q(-1, 2), 0, q(1, 2))]
        Qv = F(1)
    else:
        v0 = (0, 2 * th, 0, 1, 0)
        v1 = (2 * th, 0, 0, 1, 1)
        cols = [(1, -1, 0, 0, 0), (1, 0, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 1), (0, 0, 0, -1, 0)]
        Qv = 4 * th
    gamma0 = MatrixG(PMatrix.from_columns(cols, F).rows, F)
    v0 = tuple(_lift(F, x) for x in v0)
    v1 = tuple(_lift(F, x) for x in v1)
    pi = F.pi_power(1)
    b1 = _diagG([1 / pi, 1, 1, 1, pi], F)
    b2 = _diagG([1, 1 / pi, 1, pi, 1], F)
    w = MatrixH([[0, 1], [-1, 0]], F)
    return StandardElements(case, F, th, gamma0, v0, v1, b1, b2, w, Qv)


# ---------------------------------------------------------------------------
# orbits on the sphere

def sup_norm_exponent(s: Sequence[PadicNumber]) -> int:
    """log_q max |s_i|; imprecise zeros only count as upper bounds."""
    best = None
    bound = None
    for x in s:
        if x.is_zero:
            bound = -x.valuation if bound is None else max(bound, -x.valuation)
        else:
            best = -x.valuation if best is None else max(best, -x.valuation)
    if best is None:
        raise PrecisionError("all coordinates vanish to working precision")
    if bound is not None and bound > best and bound < EXACT_ZERO:
        raise PrecisionError("an imprecise coordinate may dominate the norm")
    return best


def classify_orbit(s) -> int:
    """The r with s in K d_r v_1."""
    coords = s.coords if isinstance(s, SpherePoint) else tuple(s)
    r = sup_norm_exponent(coords)
    if r < 0:
        raise PrecisionError(f"sup norm q^{r} < 1 is impossible on the sphere")
    return r


def open_orbit_solve(s, E: StandardElements) -> tuple:
    """Solve n(x1,x2,x3) a_alpha v1 = s for a point with s5 != 0.

    Returns ((x1, x2, x3), alpha).
    """
    s = s.coords if isinstance(s, SpherePoint) else tuple(s)
    if s[4].is_zero:
        raise ValueError("s5 = 0: the point lies on the closed orbit")
    alpha = 1 / s[4]
    x1 = s[1] * alpha
    x2 = s[2] * alpha
    if E.case == SPLIT:
        x3 = s[3] * alpha
    else:
        x3 = (s[3] - 1) * alpha
    return (x1, x2, x3), alpha


def orbit_point(x1, x2, x3, alpha, E: StandardElements) -> list:
    """n(x1,x2,x3,0) a_alpha gamma0 v0 by matrix arithmetic."""
    n = build_n(x1, x2, x3, 0, E.F)
    v = E.gamma0 @ E.v0
    v = E.a(alpha) @ v
    return n @ v


# ---------------------------------------------------------------------------
# Smith form and the double coset K b1 K

def smith_valuations(g: PMatrix) -> tuple:
    m = [list(r) for r in g.rows]
    n = len(m)
    out = []
    for c in range(n):
        piv = None
        for i in range(c, n):
            for j in range(c, n):
                x = m[i][j]
                if not x.is_zero and (piv is None or x.valuation < m[piv[0]][piv[1]].valuation):
                    piv = (i, j)
        if piv is None:
            raise PrecisionError("matrix is singular to working precision")
        i, j = piv
        m[c], m[i] = m[i], m[c]
        for row in m:
            row[c], row[j] = row[j], row[c]
        pv = m[c][c]
        out.append(pv.valuation)
        for i in range(c + 1, n):
            if not m[i][c].is_zero:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        for j in range(c + 1, n):
            if not m[c][j].is_zero:
                f = m[c][j] / pv
                for i in range(c, n):
                    m[i][j] = m[i][j] - f * m[i][c]
    return tuple(sorted(out))


PIECES = ("Kb1N1", "Kb2N2", "Kb2invN3", "Kb1inv")


def coset_lifts(F: Qp) -> dict:
    """The pieces of K b1 K: name -> (b, [(label, n, n^{-1} b^{-1}), ...])."""
    p = F.p
    E = standard_elements(SPLIT, F)
    b1, b2 = E.b1, E.b2
    b2inv = b2.inverse()
    b1inv = b1.inverse()
    N1 = [((x1, x2, x3, 0), build_n(x1, x2, x3, 0, F)) for x1 in range(p) for x2 in range(p) for x3 in range(p)]
    N2 = [((x1, 0, 0, x4), build_n(x1, 0, 0, x4, F)) for x1 in range(p) for x4 in range(p)]
    N3 = [((0, 0, x3, 0), build_n(0, 0, x3, 0, F)) for x3 in range(p)]
    one = [((0, 0, 0, 0), build_n(0, 0, 0, 0, F))]
    out = {}
    for name, b, ns in (("Kb1N1", b1, N1), ("Kb2N2", b2, N2), ("Kb2invN3", b2inv, N3), ("Kb1inv", b1inv, one)):
        binv = b.inverse()
        out[name] = (b, [(label, n, n.inverse() @ binv) for label, n in ns])
    return out


def _member(g: PMatrix, C: PMatrix) -> bool:
    """Is g @ C integral?  Column by column with early exit."""
    cols = list(zip(*C.rows))
    for col in cols:
        for row in g.rows:
            if not _is_integral(_dot(row, col)):
                return False
    return True


def coset_piece(g: MatrixG, F: Qp, lifts: dict | None = None) -> list:
    """All (piece, label) with g in K b n.  There should be exactly one."""
    lifts = lifts or coset_lifts(F)
    found = []
    for name in PIECES:
        _, ns = lifts[name]
        for label, _, C in ns:
            if _member(g, C):
                found.append((name, label))
    return found


# ---------------------------------------------------------------------------
# random elements of K

def _weyl_generators(F: Qp) -> list:
    def perm(pairs, neg3):
        rows = [[0] * 5 for _ in range(5)]
        image = list(range(5))
        for a, b in pairs:
            image[a], image[b] = b, a
        for i in range(5):
            rows[image[i]][i] = 1
        if neg3:
            rows[2][2] = -1
        return MatrixG(rows, F)
    return [perm([(0, 4)], True), perm([(1, 3)], True), perm([(0, 1), (3, 4)], False)]


def random_k(F: Qp, rng: random.Random, steps: int = 6) -> MatrixG:
    """Product of random integral root-group elements, their transposes,
    Weyl elements and diagonal units; always lands in K."""
    p = F.p
    g = MatrixG(PMatrix.identity(5, F).rows, F)
    weyl = _weyl_generators(F)
    for _ in range(steps):
        kind = rng.randrange(4)
        if kind == 0:
            h = build_n(*(rng.randrange(p**3) for _ in range(4)), F=F)
        elif kind == 1:
            h = build_n(*(rng.randrange(p**3) for _ in range(4)), F=F).transpose()
        elif kind == 2:
            h = rng.choice(weyl)
        else:
            a = rng.choice([u for u in range(1, p * p) if u % p])
            b = rng.choice([u for u in range(1, p * p) if u % p])
            h = _diagG([a, b, 1, Fraction(1, b), Fraction(1, a)], F)
        g = g @ h
    return g


def random_kb1k(F: Qp, rng: random.Random) -> MatrixG:
    E = standard_elements(SPLIT, F)
    return random_k(F, rng) @ E.b1 @ random_k(F, rng)


# ---------------------------------------------------------------------------
# PGSp(4) -> SO(5)

def Jprime(F: Qp) -> PMatrix:
    return PMatrix([[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]], F)


def T_matrix(x: Sequence, F: Qp) -> PMatrix:
    """The 4x4 matrix T(x1, ..., x5) of the space X."""
    x1, x2, x3, x4, x5 = (_lift(F, t) for t in x)
    h = Fraction(1, 2)
    cols = [(-x3 * h, x2 * h, x5, 0), (x4, x3 * h, 0, -x5), (x1 * h, 0, x3 * h, x2 * h), (0, -x1 * h, x4, -x3 * h)]
    return PMatrix.from_columns(cols, F)


def T_coords(T: PMatrix) -> list:
    x5 = T[2, 0]
    x4 = T[0, 1]
    x1 = 2 * T[0, 2]
    x2 = 2 * T[1, 0]
    x3 = 2 * T[1, 1]
    coords = [x1, x2, x3, x4, x5]
    if not T_matrix(coords, T.F).equals(T):
        raise ValueError("matrix is not in the space X")
    return coords


def similitude_factor(g: PMatrix) -> PadicNumber:
    Jp = Jprime(g.F)
    M = g @ Jp @ g.transpose()
    lam = M[0, 3]
    if lam.is_zero or not M.equals(Jp.scale(lam)):
        raise ValueError("not a symplectic similitude")
    return lam


def pgsp4_to_so5(g: PMatrix) -> MatrixG:
    """The matrix of T -> g T g^{-1} in the basis e_1..e_5 of X."""
    F = g.F
    lam = similitude_factor(g)
    Jp = Jprime(F)
    ginv = (Jp @ g.transpose() @ Jp).scale(-1 / lam)
    cols = []
    for i in range(5):
        e = [0] * 5
        e[i] = 1
        cols.append(T_coords(g @ T_matrix(e, F) @ ginv))
    return MatrixG(PMatrix.from_columns(cols, F).rows, F)


# ---------------------------------------------------------------------------
# H = PGL(2)

class MatrixH(PMatrix):
    """A 2x2 matrix up to scalars; ``canonical`` rescales to min valuation 0."""

    def canonical(self) -> "MatrixH":
        vals = [x.valuation for row in self.rows for x in row if not x.is_zero]
        if not vals:
            raise ValueError("zero matrix")
        return self.scale(self.F.pi_power(-min(vals)))

    def det(self) -> PadicNumber:
        (a, b), (c, d) = self.rows
        return a * d - b * c


def n_H(x, F: Qp) -> MatrixH:
    return MatrixH([[1, x], [0, 1]], F)


def diag_H(a, F: Qp) -> MatrixH:
    return MatrixH([[a, 0], [0, 1]], F)


@dataclass(frozen=True)
class Iwasawa:
    x: PadicNumber      # n = n(x)
    t: PadicNumber      # a = diag(t, 1), defined up to units
    k: MatrixH

    @property
    def a_valuation(self) -> int:
        return self.t.valuation


def _le(a: PadicNumber, b: PadicNumber) -> bool:
    """v(a) <= v(b), treating zeros as +infinity."""
    if a.is_zero:
        return b.is_zero
    if b.is_zero:
        return True
    return a.valuation <= b.valuation


def iwasawa_H(g: MatrixH) -> Iwasawa:
    """g = c * n(x) diag(t, 1) k with k in GL(2, Z_p), for a scalar c."""
    F = g.F
    (A, B), (C, D) = g.rows
    delta = A * D - B * C
    if delta.is_zero:
        raise ValueError("singular matrix")
    if not D.is_zero and _le(D, C):
        x = B / D
        t = delta / (D * D)
        k = MatrixH([[1, 0], [C / D, 1]], F)
    else:
        x = A / C
        t = delta / (C * C)
        # g w^{-1} = [[B, -A], [D, -C]]; then k = [[1, 0], [-D/C, 1]] w
        k = MatrixH([[1, 0], [-(D / C), 1]], F) @ MatrixH([[0, 1], [-1, 0]], F)
    return Iwasawa(x, t, k)


def eval_phi_r(r: int, g: MatrixH) -> complex:
    """phi'_r(g) = conj(psi(x)) when the A'-part has |t| = q^{-r}, else 0."""
    if r < 0:
        return 0j
    dec = iwasawa_H(g)
    if dec.t.valuation != r:
        return 0j
    return psi_add(-dec.x)
