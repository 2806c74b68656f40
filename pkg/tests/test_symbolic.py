from fractions import Fraction

import pytest

from so5match.symbolic import (
    ClosedForm,
    QSqrtRational,
    geom_sum,
    iterate_recursion,
    solve_recursion,
    solve_recursion_numeric,
)

q = 3
X = ClosedForm.X(q)
Xi = ClosedForm.monomial(-1, 1, q)


def test_sqrt_q_squares_to_q():
    s = QSqrtRational.sqrt_q(q)
    assert s * s == 3
    assert QSqrtRational.q_power(3, q) == s * 3
    assert QSqrtRational.q_power(-2, q) == Fraction(1, 3)


def test_inverse_in_quadratic_field():
    a = QSqrtRational(Fraction(1), Fraction(1), q)
    assert a.inverse() == QSqrtRational(Fraction(-1, 2), Fraction(1, 2), q)
    assert a * a.inverse() == 1
    with pytest.raises(ZeroDivisionError):
        QSqrtRational.of(0, q).inverse()


def test_laurent_arithmetic():
    assert (X + Xi) ** 2 == ClosedForm({2: 1, 0: 2, -2: 1}, q)
    assert (X**2 - Xi**2).exact_div(X - Xi) == X + Xi
    assert (X * 3) / X == 3
    assert (X + 1).substitute_inverse() == Xi + 1


def test_exact_division_refuses_remainder():
    with pytest.raises(ValueError):
        (X**2 + 1).exact_div(X - 1)


def test_negative_power_needs_monomial():
    assert (X * 2) ** -2 == ClosedForm.monomial(-2, Fraction(1, 4), q)
    with pytest.raises(ValueError):
        (X + 1) ** -1


def test_mixing_q_is_rejected():
    with pytest.raises(ValueError):
        X + ClosedForm.X(5)


def test_evaluation():
    f = X * QSqrtRational.sqrt_q(q) + Xi
    assert f(2.0) == pytest.approx(2 * 3**0.5 + 0.5)


def test_geom_sum():
    assert geom_sum(0, 3, X) == ClosedForm({0: 1, 1: 1, 2: 1, 3: 1}, q)
    assert geom_sum(-1, 1, X * 2) == ClosedForm({-1: Fraction(1, 2), 0: 1, 1: 2}, q)


def test_chebyshev_recursion_closed_and_iterated():
    coeffs = (1, -(X + Xi), 1)
    T0, T1 = ClosedForm.const(1, q), X + Xi
    expected = ClosedForm({5: 1, 3: 1, 1: 1, -1: 1, -3: 1, -5: 1}, q)
    assert solve_recursion(coeffs, T0, T1, 5) == expected
    assert iterate_recursion(coeffs, T0, T1, 5) == expected


def test_numeric_recursion_and_degenerate_point():
    coeffs = (1, -(X + Xi), 1)
    X0 = 0.5 + 0.2j
    val = solve_recursion_numeric(coeffs, 1, (X + Xi)(X0), 5, X0)
    assert val == pytest.approx(sum(X0**k for k in (5, 3, 1, -1, -3, -5)))
    with pytest.raises(ValueError):
        solve_recursion_numeric(coeffs, 1, 2, 5, 1.0)
