from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from defquant.expr import parse
from defquant.gutt import (PBWEngine, UEAElement, exp_gutt, exp_group_law, exp_star, generator_extract, gutt_comm,
                           gutt_mul, gutt_mul_uea, gutt_power, identity_realization, straighten,
                           strong_invariance_residual, symmetrize, unsymmetrize)
from defquant.lie import GVector, abelian, h3, kirillov_poisson, sl2, so3
from defquant.series import LambdaSeries, PolySeries, monomials_up_to

import oracles
from strategies import series

PRESETS = [so3, sl2, h3]


def S(text, alg=None, order=6):
    alg = alg or so3()
    return parse(text, alg.coords, order)


def test_straighten_examples():
    alg = so3()
    assert str(straighten(alg, (1, 0))) == "X1*X2 - lam*X3"
    assert str(straighten(alg, (0, 1, 1, 2))) == "X1*X2^2*X3"
    ab = abelian(3)
    assert str(straighten(ab, (2, 0, 1, 0))) == "A1^2*A2*A3"


@pytest.mark.parametrize("make", PRESETS)
def test_straighten_matches_swap_rewriting(make):
    alg = make()
    for word in [(2, 1, 0), (2, 2, 0, 1), (1, 0, 2, 1, 0), (2, 1, 0, 2, 1, 0)]:
        mine = straighten(alg, word).as_dict()
        ref = oracles.normal_order(alg, {(0, word): Fraction(1)}, 6)
        ref = {(k, oracles.exps_of(w, alg.dim)): c for (k, w), c in ref.items()}
        assert mine == ref


def test_symmetrize_examples():
    alg = so3()
    assert str(symmetrize(alg, S("x"))) == "X1"
    assert str(symmetrize(alg, S("x*y"))) == "X1*X2 - 1/2*lam*X3"
    assert symmetrize(alg, S("1")) == UEAElement.unit(alg)
    assert str(unsymmetrize(straighten(alg, (0, 1)))) == "x*y + 1/2*lam*z"
    assert str(unsymmetrize(UEAElement.unit(alg))) == "1"


@pytest.mark.parametrize("make", PRESETS)
def test_symmetrize_matches_permutation_average(make):
    alg = make()
    for J in monomials_up_to(3, 4):
        mine = symmetrize(alg, PolySeries(alg.coords, {(0, J): 1})).as_dict()
        ref = {(k, oracles.exps_of(w, 3)): c for (k, w), c in oracles.sym_oracle(alg, J, 6).items()}
        assert mine == ref, J


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_symmetrize_round_trip(make, data):
    alg = make()
    u = data.draw(series(alg.coords, degree=4))
    assert unsymmetrize(symmetrize(alg, u)) == u


def test_gutt_examples():
    alg = so3()
    u = S("x^2*y - 3*lam*z")
    assert gutt_mul(alg, S("1"), u) == u
    assert str(gutt_mul(alg, S("x"), S("y"))) == "x*y + 1/2*lam*z"
    assert str(gutt_comm(alg, S("x"), S("y"))) == "lam*z"
    assert gutt_comm(alg, u, u).is_zero()


def test_casimir_square_golden():
    """p * p = p^2 - (1/3) lam^2 p on so(3); fixed by squaring the Casimir in U(g_lam)."""
    alg = so3()
    p = S("x^2 + y^2 + z^2")
    assert gutt_mul(alg, p, p) == p * p - S("1/3*lam^2") * p
    assert oracles.gutt_oracle(alg, p, p) == gutt_mul(alg, p, p)


def test_casimir_central():
    alg = so3()
    p = S("x^2 + y^2 + z^2")
    for e in monomials_up_to(3, 4):
        assert gutt_comm(alg, p, PolySeries(alg.coords, {(0, e): 1})).is_zero()


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_gutt_matches_oracle(make, data):
    alg = make()
    u = data.draw(series(alg.coords, degree=3, max_terms=3))
    v = data.draw(series(alg.coords, degree=3, max_terms=3))
    expected = oracles.gutt_oracle(alg, u, v)
    assert gutt_mul(alg, u, v) == expected
    assert gutt_mul_uea(alg, u, v) == expected


def test_cache_does_not_change_results():
    alg = sl2()
    cold = PBWEngine(alg, 6, use_cache=False)
    warm = PBWEngine(alg, 6)
    u = S("h*e^2 - 2*f + lam*h^3", alg).terms
    v = S("e*f*h + 3*f^2", alg).terms
    assert cold.star(u, v) == warm.star(u, v) == warm.star(u, v)
    assert cold.unsymmetrize(cold.mul(cold.symmetrize(u), cold.symmetrize(v))) == cold.star(u, v)


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_associative(make, data):
    alg = make()
    u, v, w = (data.draw(series(alg.coords, degree=3, max_terms=3)) for _ in range(3))
    assert gutt_mul(alg, gutt_mul(alg, u, v), w) == gutt_mul(alg, u, gutt_mul(alg, v, w))


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_classical_limit(make, data):
    alg = make()
    u = data.draw(series(alg.coords, degree=3, max_lam=0))
    v = data.draw(series(alg.coords, degree=3, max_lam=0))
    prod = gutt_mul(alg, u, v)
    assert prod.coeff(0) == u.coeff(0) * v.coeff(0)
    comm = gutt_comm(alg, u, v)
    assert comm.coeff(1) == kirillov_poisson(u.coeff(0), v.coeff(0), alg)


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_weyl_property(make, data):
    alg = make()
    cs = data.draw(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
    xi = sum((PolySeries.var(alg.coords, v) * c for v, c in zip(alg.coords, cs)), PolySeries.zero(alg.coords))
    for k in range(7):
        assert gutt_power(alg, xi, k) == xi ** k


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_strong_invariance_and_derivation(make, data):
    alg = make()
    cs = data.draw(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
    xi = sum((PolySeries.var(alg.coords, v) * c for v, c in zip(alg.coords, cs)), PolySeries.zero(alg.coords))
    u = data.draw(series(alg.coords, degree=4))
    v = data.draw(series(alg.coords, degree=3, max_terms=3))
    assert strong_invariance_residual(alg, xi, u).is_zero()
    lhs = gutt_comm(alg, xi, gutt_mul(alg, u, v))
    assert lhs == gutt_mul(alg, gutt_comm(alg, xi, u), v) + gutt_mul(alg, u, gutt_comm(alg, xi, v))


def test_factor_two_reading_fails():
    """The commutator of linear functions is lam Pi, so kappa = 2 is not a consistent convention."""
    alg = so3()
    assert not strong_invariance_residual(alg, S("x"), S("y"), kappa=2).is_zero()


def test_exp_examples():
    alg = so3()
    zero = GVector.zero(alg)
    assert exp_gutt(zero) == S("1")
    lamx = GVector.basis_vector(alg, 0, 6, LambdaSeries.lam())
    expected = sum((S(f"lam^{k}*x^{k}") * Fraction(1, factorial(k)) for k in range(7)),
                   PolySeries.zero(alg.coords))
    assert exp_gutt(lamx) == expected
    assert gutt_mul(alg, exp_gutt(lamx), exp_gutt(-lamx)) == S("1")
    with pytest.raises(ValueError):
        exp_gutt(GVector.basis_vector(alg, 0))


def test_exp_star_agrees_with_commutative_exponential():
    alg = sl2()
    xi = GVector(alg, (LambdaSeries([0, 1, 2], 5), LambdaSeries([0, -1], 5), LambdaSeries([0, 0, 3], 5)))
    assert exp_star(alg, xi.as_series()) == exp_gutt(xi)


def test_group_law_examples():
    alg = h3()
    lam = LambdaSeries.lam(5)
    lP, lQ = (GVector.basis_vector(alg, i, 5, lam) for i in range(2))
    lhs, rhs = exp_group_law(lP, lQ)
    assert lhs == rhs
    lhs, rhs = exp_group_law(lP, GVector.zero(alg, 5))
    assert lhs == rhs == exp_gutt(lP)


@pytest.mark.parametrize("make", PRESETS)
@given(data=st.data())
def test_group_law_random(make, data):
    alg = make()
    N = 5

    def nil():
        cs = data.draw(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=3, max_size=3))
        return GVector(alg, tuple(LambdaSeries([0, a, b, 0, 0, 0], N) for a, b in cs))

    lhs, rhs = exp_group_law(nil(), nil())
    assert lhs == rhs


def test_generator_extract_identity():
    alg = so3()
    real = identity_realization(alg, 6)
    assert generator_extract(real, (1, 0, 0), 1) == S("x")
    assert generator_extract(real, (1, 1, 0), 2) == S("x*y")
    for J in monomials_up_to(3, 3):
        assert generator_extract(real, J, 3) == PolySeries(alg.coords, {(0, J): 1})
    with pytest.raises(ValueError):
        generator_extract(real, (2, 0, 0), 1)


def test_uea_grading():
    alg = so3()
    assert straighten(alg, (1, 0)).degree() == 4
