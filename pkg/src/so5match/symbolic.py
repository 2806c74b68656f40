"""Exact Laurent polynomials in X with coefficients in Q(sqrt q)."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, Fraction]


@dataclass(frozen=True)
class QSqrtRational:
    """a + b*sqrt(q) with a, b rational."""
    a: Fraction
    b: Fraction
    q: int

    @classmethod
    def of(cls, value, q: int) -> "QSqrtRational":
        if isinstance(value, QSqrtRational):
            if value.q != q:
                raise ValueError("mixing different q")
            return value
        return cls(Fraction(value), Fraction(0), q)

    @classmethod
    def sqrt_q(cls, q: int) -> "QSqrtRational":
        return cls(Fraction(0), Fraction(1), q)

    @classmethod
    def q_power(cls, twice_exponent: int, q: int) -> "QSqrtRational":
        """q**(twice_exponent/2)."""
        k, odd = divmod(twice_exponent, 2)
        base = Fraction(q) ** k
        return cls(Fraction(0), base, q) if odd else cls(base, Fraction(0), q)

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __add__(self, other):
        o = QSqrtRational.of(other, self.q)
        return QSqrtRational(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __neg__(self):
        return QSqrtRational(-self.a, -self.b, self.q)

    def __sub__(self, other):
        return self + (-QSqrtRational.of(other, self.q))

    def __rsub__(self, other):
        return QSqrtRational.of(other, self.q) - self

    def __mul__(self, other):
        o = QSqrtRational.of(other, self.q)
        return QSqrtRational(self.a * o.a + self.q * self.b * o.b, self.a * o.b + self.b * o.a, self.q)

    __rmul__ = __mul__

    def conjugate(self) -> "QSqrtRational":
        return QSqrtRational(self.a, -self.b, self.q)

    def norm(self) -> Fraction:
        return self.a * self.a - self.q * self.b * self.b

    def inverse(self) -> "QSqrtRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt q)")
        c = self.conjugate()
        return QSqrtRational(c.a / n, c.b / n, self.q)

    def __truediv__(self, other):
        return self * QSqrtRational.of(other, self.q).inverse()

    def __rtruediv__(self, other):
        return QSqrtRational.of(other, self.q) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QSqrtRational.of(1, self.q)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            o = QSqrtRational.of(other, self.q)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.q))

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * self.q**0.5

    def __complex__(self) -> complex:
        return complex(float(self))

    def __repr__(self) -> str:
        if not self.b:
            return str(self.a)
        return f"({self.a} + {self.b}*sqrt({self.q}))"


class ClosedForm:
    """A Laurent polynomial sum_k c_k X^k, c_k in Q(sqrt q)."""

    __slots__ = ("coeffs", "q")

    def __init__(self, coeffs: Mapping[int, object], q: int):
        clean = {}
        for k, c in coeffs.items():
            c = QSqrtRational.of(c, q)
            if c:
                clean[int(k)] = c
        self.coeffs = clean
        self.q = q

    # constructors
    @classmethod
    def const(cls, c, q: int) -> "ClosedForm":
        return cls({0: c}, q)

    @classmethod
    def monomial(cls, exponent: int, c, q: int) -> "ClosedForm":
        return cls({exponent: c}, q)

    @classmethod
    def X(cls, q: int) -> "ClosedForm":
        return cls({1: 1}, q)

    # structure
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    def degree_range(self) -> tuple:
        return min(self.coeffs), max(self.coeffs)

    def coefficient(self, k: int) -> QSqrtRational:
        return self.coeffs.get(k, QSqrtRational.of(0, self.q))

    def _lift(self, other) -> "ClosedForm":
        if isinstance(other, ClosedForm):
            if other.q != self.q:
                raise ValueError("mixing different q")
            return other
        return ClosedForm.const(other, self.q)

    # ring operations
    def __add__(self, other):
        o = self._lift(other)
        out = dict(self.coeffs)
        for k, c in o.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return ClosedForm(out, self.q)

    __radd__ = __add__

    def __neg__(self):
        return ClosedForm({k: -c for k, c in self.coeffs.items()}, self.q)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in o.coeffs.items():
                out[i + j] = out[i + j] + a * b if i + j in out else a * b
        return ClosedForm(out, self.q)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if not self.is_monomial():
                raise ValueError("negative powers need a monomial")
            (e, c), = self.coeffs.items()
            return ClosedForm.monomial(e * k, c**k, self.q)
        out = ClosedForm.const(1, self.q)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other):
        o = self._lift(other)
        if o.is_monomial():
            (e, c), = o.coeffs.items()
            inv = c.inverse()
            return ClosedForm({k - e: v * inv for k, v in self.coeffs.items()}, self.q)
        return self.exact_div(o)

    def exact_div(self, other: "ClosedForm") -> "ClosedForm":
        """Laurent long division; raises if the remainder is non-zero."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero form")
        rem = self
        quot = ClosedForm({}, self.q)
        lo_d, hi_d = other.degree_range()
        lead = other.coeffs[hi_d]
        while not rem.is_zero():
            lo_r, hi_r = rem.degree_range()
            if hi_r - lo_r < hi_d - lo_d:
                raise ValueError("not exactly divisible")
            t = ClosedForm.monomial(hi_r - hi_d, rem.coeffs[hi_r] / lead, self.q)
            quot = quot + t
            rem = rem - t * other
        return quot

    def substitute_inverse(self) -> "ClosedForm":
        """X -> 1/X."""
        return ClosedForm({-k: c for k, c in self.coeffs.items()}, self.q)

    def __call__(self, X0: complex) -> complex:
        X0 = complex(X0)
        return sum((complex(c) * X0**k for k, c in self.coeffs.items()), 0j)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QSqrtRational)):
            other = ClosedForm.const(other, self.q)
        if not isinstance(other, ClosedForm):
            return NotImplemented
        return self.q == other.q and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.q, tuple(sorted(self.coeffs.items()))))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c}*X^{k}" for k, c in sorted(self.coeffs.items()))


def geom_sum(first: int, last: int, ratio: ClosedForm) -> ClosedForm:
    """sum_{k=first}^{last} ratio**k for a monomial ratio."""
    if first > last:
        raise ValueError("first exponent exceeds last")
    if not ratio.is_monomial():
        raise ValueError("ratio must be a monomial")
    out = ClosedForm({}, ratio.q)
    for k in range(first, last + 1):
        out = out + ratio**k
    return out


def _split_roots(A: ClosedForm, B: ClosedForm, C: ClosedForm) -> tuple:
    """Monomial roots of A*l^2 + B*l + C when they exist."""
    s = -B / A
    prod = C / A
    if len(s.coeffs) != 2:
        raise ValueError("characteristic roots are not monomials")
    (e1, c1), (e2, c2) = sorted(s.coeffs.items())
    l1 = ClosedForm.monomial(e1, c1, A.q)
    l2 = ClosedForm.monomial(e2, c2, A.q)
    if l1 * l2 != prod:
        raise ValueError("characteristic roots are not monomials")
    return l2, l1


def solve_recursion(coeffs: tuple, T0: ClosedForm, T1: ClosedForm, r: int) -> ClosedForm:
    """T_r for A*T_{k+1} + B*T_k + C*T_{k-1} = 0 via the characteristic roots.

    The quotient by (lambda_1 - lambda_2) is carried out exactly; it fails
    only if the roots coincide.
    """
    A, B, C = (c if isinstance(c, ClosedForm) else ClosedForm.const(c, T0.q) for c in coeffs)
    if r == 0:
        return T0
    if r == 1:
        return T1
    l1, l2 = _split_roots(A, B, C)
    diff = l1 - l2
    if diff.is_zero():
        raise ValueError("degenerate characteristic roots")
    num = (T1 - l2 * T0) * l1**r - (T1 - l1 * T0) * l2**r
    return num.exact_div(diff)


def iterate_recursion(coeffs: tuple, T0: ClosedForm, T1: ClosedForm, r: int) -> ClosedForm:
    A, B, C = (c if isinstance(c, ClosedForm) else ClosedForm.const(c, T0.q) for c in coeffs)
    prev, cur = T0, T1
    if r == 0:
        return T0
    for _ in range(r - 1):
        prev, cur = cur, (-(B * cur) - C * prev) / A
    return cur


def solve_recursion_numeric(coeffs: tuple, T0: complex, T1: complex, r: int, X0: complex,
                            tol: float = 1e-9) -> complex:
    """Numeric analogue at a specific X0; refuses X0**2 == 1."""
    if abs(complex(X0) ** 2 - 1) < tol:
        raise ValueError("degenerate roots at X^2 = 1; use the iterative path")
    A, B, C = (complex(c(X0)) if isinstance(c, ClosedForm) else complex(c) for c in coeffs)
    disc = (B * B - 4 * A * C) ** 0.5
    l1, l2 = (-B + disc) / (2 * A), (-B - disc) / (2 * A)
    return ((T1 - l2 * T0) * l1**r - (T1 - l1 * T0) * l2**r) / (l1 - l2)
