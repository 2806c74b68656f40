"""Fixed-precision model of Q_p for odd p.

A non-zero element is stored as p**valuation * unit, where the unit is an
integer known modulo p**precision.  Zero carries an absolute precision bound
instead: a zero with ``valuation == k`` means "some element of p**k Z_p".
Exact zeros use ``EXACT_ZERO`` as the bound.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

DEFAULT_PRECISION = 24
EXACT_ZERO = 10**9


class PrecisionError(ArithmeticError):
    """Raised when cancellation has used up every known digit."""


def vp(n: int, p: int) -> int:
    """p-adic valuation of a non-zero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


Rational = Union[int, Fraction]


@dataclass(frozen=True, eq=False)
class PadicNumber:
    p: int
    valuation: int
    unit: int
    precision: int

    # -- construction -----------------------------------------------------
    @classmethod
    def from_rational(cls, value: Rational, p: int, precision: int = DEFAULT_PRECISION) -> "PadicNumber":
        value = Fraction(value)
        if value == 0:
            return cls(p, EXACT_ZERO, 0, 0)
        num, den = value.numerator, value.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p**precision
        return cls(p, v, num * pow(den, -1, mod) % mod, precision)

    @classmethod
    def zero(cls, p: int, bound: int = EXACT_ZERO) -> "PadicNumber":
        return cls(p, bound, 0, 0)

    # -- inspection -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def unit_digits(self) -> tuple:
        """Base-p digits of the unit part, least significant first."""
        out = []
        u = self.unit
        for _ in range(self.precision):
            out.append(u % self.p)
            u //= self.p
        return tuple(out)

    @property
    def absolute_precision(self) -> int:
        return self.valuation if self.is_zero else self.valuation + self.precision

    def abs(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    def val(self) -> int:
        """Valuation of a non-zero element; refuses inexact zeros."""
        if self.is_zero:
            if self.valuation >= EXACT_ZERO:
                raise ValueError("valuation of exact zero")
            raise PrecisionError(f"value is O(p^{self.valuation}); valuation unknown")
        return self.valuation

    def fractional_part(self) -> Fraction:
        """The principal part sum_{i<0} digit_i p^i as a rational in [0, 1)."""
        if self.is_zero:
            if self.valuation < 0:
                raise PrecisionError("principal part of an imprecise zero")
            return Fraction(0)
        if self.valuation >= 0:
            return Fraction(0)
        k = -self.valuation
        if k > self.precision:
            raise PrecisionError("principal part needs more digits than are known")
        return Fraction(self.unit % self.p**k, self.p**k)

    def unit_residue(self, m: int) -> int:
        """Unit part modulo p**m."""
        if self.is_zero:
            raise ValueError("zero has no unit part")
        if m > self.precision:
            raise PrecisionError("unit residue beyond known precision")
        return self.unit % self.p**m

    def to_fraction(self) -> Fraction:
        """Rational reconstruction of the unit (small numerator and denominator)."""
        if self.is_zero:
            return Fraction(0)
        a, b = _rational_reconstruction(self.unit, self.p**self.precision)
        return Fraction(a, b) * Fraction(self.p) ** self.valuation

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            prec = self.precision if self.precision else DEFAULT_PRECISION
            return PadicNumber.from_rational(other, self.p, prec)
        return NotImplemented

    def __add__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _add(self, y)

    __radd__ = __add__

    def __neg__(self) -> "PadicNumber":
        if self.is_zero:
            return self
        return PadicNumber(self.p, self.valuation, (-self.unit) % self.p**self.precision, self.precision)

    def __sub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _add(self, -y)

    def __rsub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _add(y, -self)

    def __mul__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _mul(self, y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _div(self, y)

    def __rtruediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return y
        return _div(y, self)

    def __pow__(self, k: int) -> "PadicNumber":
        if k < 0:
            return _div(PadicNumber.from_rational(1, self.p, self.precision or DEFAULT_PRECISION), self**(-k))
        out = PadicNumber.from_rational(1, self.p, self.precision or DEFAULT_PRECISION)
        for _ in range(k):
            out = out * self
        return out

    def equals(self, other) -> bool:
        """Equality up to the precision both operands carry."""
        return (self - other).is_zero

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, PadicNumber)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        if self.is_zero:
            return "0" if self.valuation >= EXACT_ZERO else f"O({self.p}^{self.valuation})"
        return f"Padic({self.to_fraction()}, p={self.p}, v={self.valuation}, N={self.precision})"


def _rational_reconstruction(u: int, m: int) -> tuple:
    bound = math.isqrt(m // 2)
    r0, r1 = m, u % m
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 < 0:
        r1, s1 = -r1, -s1
    return r1, s1


def _normalize(p: int, v: int, s: int, abs_prec: int) -> PadicNumber:
    """Build p**v * s known modulo p**abs_prec."""
    rel = abs_prec - v
    if rel <= 0:
        return PadicNumber(p, abs_prec, 0, 0)
    s %= p**rel
    if s == 0:
        return PadicNumber(p, abs_prec, 0, 0)
    while s % p == 0:
        s //= p
        v += 1
        rel -= 1
    return PadicNumber(p, v, s, rel)


def _add(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.p
    if x.is_zero and y.is_zero:
        return PadicNumber(p, min(x.valuation, y.valuation), 0, 0)
    if x.is_zero:
        x, y = y, x
    if y.is_zero:
        if y.valuation >= x.absolute_precision:
            return x
        return _normalize(p, x.valuation, x.unit, y.valuation)
    v = min(x.valuation, y.valuation)
    a = min(x.absolute_precision, y.absolute_precision)
    s = x.unit * p ** (x.valuation - v) + y.unit * p ** (y.valuation - v)
    return _normalize(p, v, s, a)


def _mul(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.p
    if x.is_zero or y.is_zero:
        if x.is_zero and y.is_zero:
            bound = x.valuation + y.valuation
        elif x.is_zero:
            bound = x.valuation + y.valuation
        else:
            bound = y.valuation + x.valuation
        return PadicNumber(p, min(bound, EXACT_ZERO), 0, 0)
    prec = min(x.precision, y.precision)
    return PadicNumber(p, x.valuation + y.valuation, x.unit * y.unit % p**prec, prec)


def _div(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.p
    if y.is_zero:
        if y.valuation >= EXACT_ZERO:
            raise ZeroDivisionError("division by zero")
        raise PrecisionError("divisor has no known non-zero digit")
    if x.is_zero:
        return PadicNumber(p, min(x.valuation - y.valuation, EXACT_ZERO), 0, 0)
    prec = min(x.precision, y.precision)
    mod = p**prec
    return PadicNumber(p, x.valuation - y.valuation, x.unit * pow(y.unit, -1, mod) % mod, prec)


def arith(x: PadicNumber, y: PadicNumber, op: str) -> PadicNumber:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown op {op!r}")


@dataclass(frozen=True)
class Qp:
    """Convenience constructor bundle: a prime and a working precision."""
    p: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")

    def __call__(self, value: Rational) -> PadicNumber:
        return PadicNumber.from_rational(value, self.p, self.precision)

    def pi_power(self, k: int) -> PadicNumber:
        return PadicNumber(self.p, k, 1, self.precision)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


# -- additive character -----------------------------------------------------

def psi_add(x: PadicNumber) -> complex:
    """The standard additive character e(principal part of x); conductor Z_p."""
    return cmath.exp(2j * math.pi * x.fractional_part())


def e(t) -> complex:
    return cmath.exp(2j * math.pi * (t % 1))


# -- multiplicative characters ------------------------------------------------

@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest generator of (Z/p^2)^x, hence of (Z/p^m)^x for every m."""
    phi = p * (p - 1)
    factors = {f for f in range(2, phi + 1) if phi % f == 0 and is_prime(f)}
    for g in range(2, p * p):
        if g % p and all(pow(g, phi // f, p * p) != 1 for f in factors):
            return g
    raise RuntimeError("no primitive root")


@lru_cache(maxsize=None)
def _dlog_table(p: int, m: int) -> dict:
    mod = p**m
    g = primitive_root(p)
    table = {}
    x = 1
    for j in range(mod // p * (p - 1)):
        table[x] = j
        x = x * g % mod
    return table


@dataclass(frozen=True)
class CharacterSpec:
    """A character of Q_p^x.

    The unit part is chi(g^j) = e(unit_index * j / phi(p^m)) for the fixed
    generator g.  ``value_at_pi`` is chi(p); ``None`` means symbolic, in which
    case X = chi(p)^{-1} is left as a variable.
    """
    p: int
    conductor: int = 0
    unit_index: int = 0
    value_at_pi: complex | None = None

    def __post_init__(self):
        m = self.conductor
        if m < 0:
            raise ValueError("conductor must be >= 0")
        if m == 0:
            if self.unit_index != 0:
                raise ValueError("an unramified character has trivial unit part")
            return
        order = self.p ** (m - 1) * (self.p - 1)
        k = self.unit_index % order
        if m == 1 and k == 0:
            raise ValueError("conductor 1 needs a non-trivial unit character")
        if m >= 2 and k % self.p == 0:
            raise ValueError(f"unit_index {self.unit_index} does not have conductor exactly {m}")

    @property
    def ramified(self) -> bool:
        return self.conductor > 0

    def unit_value(self, u: int) -> complex:
        m = self.conductor
        if m == 0:
            return 1.0 + 0j
        mod = self.p**m
        j = _dlog_table(self.p, m)[u % mod]
        return e(Fraction(self.unit_index * j, mod // self.p * (self.p - 1)))

    def conjugate(self) -> "CharacterSpec":
        vpi = None if self.value_at_pi is None else complex(self.value_at_pi).conjugate()
        return CharacterSpec(self.p, self.conductor, -self.unit_index, vpi)


def chi_eval(spec: CharacterSpec, x: PadicNumber, X: complex | None = None):
    """chi(x).  With symbolic value_at_pi and no numeric X, an unramified
    character returns the ClosedForm monomial X^{-v(x)}."""
    if x.is_zero:
        raise ValueError("chi(0) is undefined")
    v = x.valuation
    unit = spec.unit_value(x.unit_residue(spec.conductor)) if spec.conductor else 1.0
    if spec.value_at_pi is not None:
        return complex(spec.value_at_pi) ** v * unit
    if X is not None:
        return complex(X) ** (-v) * unit
    if spec.ramified:
        raise ValueError("symbolic evaluation needs an unramified character")
    from .symbolic import ClosedForm
    return ClosedForm.monomial(-v, 1, spec.p)


# -- squares and the Hilbert symbol -----------------------------------------

def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def smallest_nonresidue(p: int) -> int:
    return next(a for a in range(2, p) if legendre(a, p) == -1)


def is_square(x: PadicNumber) -> bool:
    if x.is_zero:
        raise ValueError("is_square(0)")
    return x.valuation % 2 == 0 and legendre(x.unit, x.p) == 1


def hilbert_symbol(theta: PadicNumber, alpha: PadicNumber) -> int:
    """(theta, alpha) for theta a unit; odd-valuation theta is unsupported."""
    if theta.is_zero or alpha.is_zero:
        raise ValueError("Hilbert symbol of zero")
    if theta.valuation % 2:
        raise ValueError("theta of odd valuation is not supported")
    if theta.valuation != 0:
        theta = PadicNumber(theta.p, 0, theta.unit, theta.precision)
    return legendre(theta.unit, theta.p) ** (alpha.valuation % 2)


# -- Haar measure cells ------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """|x| <= q**B."""
    B: int


@dataclass(frozen=True)
class Shell:
    """|x| = q**s."""
    s: int


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Cell:
    center: PadicNumber
    level: int
    additive_measure: Fraction
    multiplicative_measure: Fraction | None


def _ball_cells(p: int, B: int, L: int, precision: int) -> list:
    if L < -B:
        raise ValueError(f"level {L} coarser than the ball |x| <= q^{B}")
    meas = Fraction(1, p**L) if L >= 0 else Fraction(p ** (-L))
    out = []
    step = Fraction(p) ** (-B)
    for j in range(p ** (B + L)):
        c = PadicNumber.from_rational(j * step, p, precision)
        # a cell containing 0 has no multiplicative measure
        mult = None
        if not c.is_zero and c.valuation < L:
            mult = meas * Fraction(p) ** c.valuation / (1 - Fraction(1, p))
        out.append(Cell(c, L, meas, mult))
    return out


def _shell_cells(p: int, s: int, L: int, precision: int) -> list:
    # centres p^{-s} u with u a unit modulo p^{L+s}; need the cell inside the shell
    depth = L + s
    if depth < 1:
        raise ValueError(f"level {L} is too coarse for the shell |x| = q^{s}")
    meas = Fraction(p) ** (-L)
    mult = meas / Fraction(p) ** s / (1 - Fraction(1, p))
    out = []
    for u in range(1, p**depth):
        if u % p:
            c = PadicNumber(p, -s, u, precision)
            out.append(Cell(c, L, meas, mult))
    return out


def enumerate_cells(region, level: int, p: int, precision: int = DEFAULT_PRECISION) -> Iterator:
    """Partition ``region`` into cells c + p^level Z_p.

    For a ``Product`` region, yields tuples of cells, one per factor; the same
    level is used for every factor.
    """
    if isinstance(region, Ball):
        yield from _ball_cells(p, region.B, level, precision)
    elif isinstance(region, Shell):
        yield from _shell_cells(p, region.s, level, precision)
    elif isinstance(region, Product):
        pools = [list(enumerate_cells(f, level, p, precision)) for f in region.factors]
        yield from _product(pools)
    else:
        raise TypeError(f"unknown region {region!r}")


def _product(pools: Sequence[list]) -> Iterator[tuple]:
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest


def region_measure(region, p: int) -> Fraction:
    if isinstance(region, Ball):
        return Fraction(p) ** region.B
    if isinstance(region, Shell):
        return Fraction(p) ** region.s * (1 - Fraction(1, p))
    out = Fraction(1)
    for f in region.factors:
        out *= region_measure(f, p)
    return out
