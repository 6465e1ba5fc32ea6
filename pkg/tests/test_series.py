from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from defquant.expr import ParseError, parse
from defquant.series import (NEG_INF, LambdaSeries, Poly, PolySeries, VariableMismatch, compose, exp_nilpotent,
                             formal_shift)

from strategies import polys, series

XY = ("x", "y")
XYZ = ("x", "y", "z")


def P(text, variables=XY, order=6):
    return parse(text, variables, order)


def test_poly_ring_examples():
    x, y = Poly.var(XY, "x"), Poly.var(XY, "y")
    assert (x + y) * (x - y) == x ** 2 - y ** 2
    assert (x ** 2 * y).diff("x") == Poly(XY, {(1, 1): 2})
    assert (x ** 2 * y).D_multi((2, 0)) == 2 * y


def test_zero_degree_is_sentinel():
    assert Poly(XY).degree == NEG_INF
    assert Poly.const(XY, 5).degree == 0


def test_variable_mismatch():
    with pytest.raises(VariableMismatch):
        Poly.var(XY, "x") + Poly.var(("x", "z"), "x")


def test_series_examples():
    lam = LambdaSeries.lam(6)
    assert exp_nilpotent(LambdaSeries.const(0, 6)) == LambdaSeries.const(1, 6)
    a = lam * 3
    assert exp_nilpotent(a) * exp_nilpotent(-a) == LambdaSeries.const(1, 6)
    geo = LambdaSeries([1, 1], 3) * LambdaSeries([1, -1, 1, -1], 3)
    assert geo == LambdaSeries.const(1, 3)


def test_exp_rejects_constant_term():
    with pytest.raises(ValueError):
        exp_nilpotent(LambdaSeries.const(1, 4))


def test_truncation_order_is_min():
    a = LambdaSeries([1, 2, 3], 4)
    b = LambdaSeries([1, 1], 2)
    assert (a * b).order == 2
    assert (a + b).order == 2


def test_canonical_print():
    assert str(P("y*x + 1/2*lam*z", XYZ)) == "x*y + 1/2*lam*z"
    assert str(P("1 - z^2 - y^2", XYZ)) == "1 - y^2 - z^2"
    assert str(P("0")) == "0"
    assert str(P("lam^2*x - 2/3*lam")) == "-2/3*lam + lam^2*x"


@given(series(XYZ, degree=3, max_lam=3, coeffs=st.integers(-5, 5)))
def test_print_round_trip(s):
    assert parse(str(s), XYZ, s.order) == s


def test_parse_errors():
    for bad in ("x +", "(x", "x / y", "2^x", "w", "", "x ^ -1"):
        with pytest.raises(ParseError):
            parse(bad, XY)


def test_parse_division_by_constant():
    assert P("x/2 + (y - 1)/3") == P("1/2*x + 1/3*y - 1/3")


@given(series(XY), series(XY), series(XY))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + (b - a) == b


@given(series(XY, order=6), series(XY, order=6))
def test_truncation_monotone(a, b):
    low = a.truncate(3) * b.truncate(3)
    assert (a * b).truncate(3) == low
    assert low.order == 3


def test_formal_shift_examples():
    ys = ("y",)
    lamx = PolySeries.lam(("x",), 6) * PolySeries.var(("x",), "x", 6)
    assert str(formal_shift(Poly.var(ys, "y"), {"y": lamx}, 6)) == "y + lam*x"
    assert str(formal_shift(Poly.var(ys, "y") ** 2, {"y": lamx}, 6)) == "y^2 + 2*lam*x*y + lam^2*x^2"
    assert str(formal_shift(Poly.const(ys, 7), {"y": lamx}, 6)) == "7"


def test_formal_shift_rejects_classical_shift():
    with pytest.raises(ValueError):
        formal_shift(Poly.var(("y",), "y"), {"y": PolySeries.var(("x",), "x")}, 6)


@given(polys(("y1", "y2"), 3), polys(("y1", "y2"), 3),
       st.lists(series(("x1",), degree=2, max_lam=2), min_size=2, max_size=2))
def test_formal_shift_is_ring_morphism(u1, u2, ps):
    lam = PolySeries.lam(("x1",), 6)
    p = {"y1": lam * ps[0], "y2": lam * ps[1]}
    assert formal_shift(u1 * u2, p, 6) == formal_shift(u1, p, 6) * formal_shift(u2, p, 6)


@given(polys(("y1", "y2"), 4), st.lists(series(("x1",), degree=2), min_size=2, max_size=2))
def test_formal_shift_is_substitution(u, ps):
    lam = PolySeries.lam(("x1",), 6)
    p = {"y1": lam * ps[0], "y2": lam * ps[1]}
    allv = ("x1", "y1", "y2")
    values = [PolySeries.var(allv, "x1")] + [PolySeries.var(allv, y) + p[y].rename(allv) for y in ("y1", "y2")]
    assert formal_shift(u, p, 6) == PolySeries.from_poly(u.rename(allv)).subs(values)


def test_compose_examples():
    u = Poly(("y1", "y2"), {(1, 1): 1})
    x = PolySeries.var(("x",), "x", 6)
    lam = PolySeries.lam(("x",), 6)
    assert str(compose(u, [x, x + lam], 6)) == "x^2 + lam*x"
    assert compose(Poly.var(("y",), "y"), [x * 3 + lam], 6) == x * 3 + lam


def test_compose_arity():
    with pytest.raises(VariableMismatch):
        compose(Poly.var(("y1", "y2"), "y1"), [PolySeries.var(("x",), "x")], 6)


@given(polys(("y1", "y2"), 5, max_terms=5), st.lists(series(XY, degree=2, max_lam=2), min_size=2, max_size=2))
def test_compose_matches_power_expansion(u, v):
    # sum_J a_J v^J, evaluated term by term with powers of the substituted series
    expected = PolySeries.zero(XY, 6)
    for (a, b), c in u.terms.items():
        expected = expected + (v[0] ** a) * (v[1] ** b) * c
    assert compose(u, v, 6) == expected


def test_machine_form():
    m = P("x + lam*y^2", XY, 2).machine()
    assert m == {"variables": ["x", "y"], "order": 2,
                 "coefficients": [[[[1, 0], "1"]], [[[0, 2], "1"]], []]}


def test_fraction_coefficients_stay_exact():
    s = P("1/3*x") * Fraction(3, 7)
    assert s == P("1/7*x")
