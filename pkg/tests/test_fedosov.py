from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from defquant import fedosov as fd
from defquant.expr import parse
from defquant.lie import GVector, abelian, ch_lambda, h3, sl2
from defquant.series import LambdaSeries, PolySeries

import oracles
from strategies import series

FLAT1 = fd.FedosovConfig(fd.SymplecticData.standard(1), coords=("q", "p"))
FLAT2 = fd.FedosovConfig(fd.SymplecticData.standard(2))
PERT = fd.FedosovConfig(fd.SymplecticData.standard(1), ((1, ((0, 1), (-1, 0))),), 6, ("q", "p"))
PERT2 = fd.FedosovConfig(fd.SymplecticData.standard(1), ((1, ((0, 2), (-2, 0))), (2, ((0, -1), (1, 0)))), 5)


def B(text, cfg=FLAT1):
    return parse(text, cfg.coords, cfg.order)


def W(text, cfg=FLAT1):
    return parse(text, cfg.variables, cfg.order)


def test_symplectic_inverse():
    sd = fd.SymplecticData.from_rows([[0, 2, 0, 0], [-2, 0, 0, 1], [0, 0, 0, 3], [0, -1, -3, 0]])
    d = sd.dim
    for i in range(d):
        for j in range(d):
            assert sum(sd.omega_inv[i][k] * sd.omega[k][j] for k in range(d)) == (i == j)


def test_symplectic_rejects_degenerate():
    with pytest.raises(fd.FedosovError):
        fd.SymplecticData.from_rows([[0, 1], [1, 0]])
    with pytest.raises(fd.FedosovError):
        fd.SymplecticData.from_rows([[0, 0], [0, 0]])


def test_moyal_examples():
    sd = FLAT1.symplectic
    y1, y2 = W("y1"), W("y2")
    a = W("q*y1^2 + lam*y2")
    assert fd.moyal(a, W("1"), sd) == a
    assert fd.moyal(y1, y2, sd) - fd.moyal(y2, y1, sd) == W("lam")
    assert fd.moyal(y1, y1, sd) == W("y1^2")


@pytest.mark.parametrize("cfg", [FLAT1, FLAT2])
@given(data=st.data())
def test_moyal_matches_bidifferential_sum(cfg, data):
    sd = cfg.symplectic
    u = data.draw(series(cfg.coords, degree=3, max_terms=3))
    v = data.draw(series(cfg.coords, degree=3, max_terms=3))
    assert fd.moyal_base(u, v, sd) == oracles.moyal_oracle(u, v, sd.omega_inv, 6)


@pytest.mark.parametrize("cfg", [FLAT1, FLAT2])
@given(data=st.data())
def test_moyal_associative(cfg, data):
    sd = cfg.symplectic
    u, v, w = (data.draw(series(cfg.coords, degree=4, max_terms=3)) for _ in range(3))
    assert fd.moyal_base(fd.moyal_base(u, v, sd), w, sd) == fd.moyal_base(u, fd.moyal_base(v, w, sd), sd)


def forms(cfg, max_deg=2):
    d = cfg.symplectic.dim
    idx = st.sampled_from([I for q in range(max_deg + 1) for I in _subsets(d, q)])
    return st.dictionaries(idx, series(cfg.variables, degree=3, max_terms=3), max_size=3).map(
        lambda parts: fd.WeylForm.from_dict(cfg.variables, parts, cfg.order))


def _subsets(d, q):
    from itertools import combinations
    return list(combinations(range(d), q))


def test_delta_examples():
    nb = 2
    y1 = fd.WeylForm.scalar(W("y1"))
    dx1 = fd.WeylForm.from_dict(FLAT1.variables, {(0,): W("1")}, 6)
    assert fd.delta(y1, nb) == dx1
    assert fd.delta_inv(dx1, nb) == y1


@given(forms(FLAT1))
def test_delta_homotopy(a):
    nb = 2
    assert fd.delta(fd.delta(a, nb), nb).is_zero()
    assert fd.delta_inv(fd.delta_inv(a, nb), nb).is_zero()
    rebuilt = fd.delta(fd.delta_inv(a, nb), nb) + fd.delta_inv(fd.delta(a, nb), nb) + fd.project00(a, nb)
    assert rebuilt == a


@given(forms(FLAT1))
def test_filtration_bookkeeping(a):
    nb = 2
    fa = a.filtration_degree(nb)
    d = fd.delta(a, nb)
    if not d.is_zero():
        assert d.filtration_degree(nb) >= fa - 1
        assert max(d.form_degrees()) <= max(a.form_degrees()) + 1
    di = fd.delta_inv(a, nb)
    if not di.is_zero():
        assert di.filtration_degree(nb) >= fa + 1


def test_flat_gamma_is_zero():
    assert fd.build_gamma(FLAT1).is_zero()
    assert fd.build_gamma(FLAT2).is_zero()
    assert fd.curvature(fd.build_gamma(FLAT1), FLAT1) == fd.symplectic_form(FLAT1, 6)


@pytest.mark.parametrize("cfg", [PERT, PERT2])
def test_perturbed_gamma(cfg):
    nb = len(cfg.coords)
    gamma = fd.build_gamma(cfg)
    assert not gamma.is_zero()
    assert gamma.filtration_degree(nb) >= 3
    assert fd.delta_inv(gamma, nb).is_zero()
    omega = fd.symplectic_form(cfg, cfg.order) + fd.omega_form(cfg, cfg.order)
    assert fd.curvature(gamma, cfg) == omega


@pytest.mark.parametrize("cfg", [PERT, PERT2])
def test_linear_commutators(cfg):
    inv = fd.series_matrix_inverse(cfg.curvature_matrix())
    V = cfg.coords
    lam = LambdaSeries.lam(cfg.order)
    for i in range(2):
        for j in range(2):
            u, v = PolySeries.var(V, V[i], cfg.order), PolySeries.var(V, V[j], cfg.order)
            comm = fd.fedosov_star(u, v, cfg) - fd.fedosov_star(v, u, cfg)
            assert comm == PolySeries.const(V, lam * inv[i][j], cfg.order)


def test_perturbed_commutator_closed_form():
    # Omega_12 = -1 + lam, so (Omega^-1)^12 = 1/(1 - lam)
    comm = fd.fedosov_star(B("q", PERT), B("p", PERT), PERT) - fd.fedosov_star(B("p", PERT), B("q", PERT), PERT)
    assert str(comm) == "lam + lam^2 + lam^3 + lam^4 + lam^5 + lam^6"


def test_flat_quantize_is_taylor_shift():
    """On the flat configuration Q(u) is u(x + y)."""
    V = FLAT1.variables
    shifted = [PolySeries.var(V, "q") + PolySeries.var(V, "y1"), PolySeries.var(V, "p") + PolySeries.var(V, "y2")]
    for text in ("q^2*p", "p^3 - 2*q + lam*q*p", "1"):
        u = B(text)
        assert fd.quantize(u, FLAT1) == u.subs(shifted), text
    assert str(fd.quantize(B("q^2*p"), FLAT1)) == "q^2*p + q^2*y2 + 2*q*p*y1 + 2*q*y1*y2 + p*y1^2 + y1^2*y2"


@pytest.mark.parametrize("cfg", [FLAT1, PERT])
@given(data=st.data())
def test_quantize_flat_sections(cfg, data):
    gamma = fd.gamma_for(cfg)
    u = data.draw(series(cfg.coords, degree=3, max_terms=3))
    q = fd.quantize(u, cfg, gamma)
    assert fd.sigma(q, cfg) == u
    assert fd.connection(fd.WeylForm.scalar(q), gamma, cfg).is_zero()
    # Q(sigma(a)) = a on a flat section built independently (here: Q of u itself)
    assert fd.quantize(fd.sigma(q, cfg), cfg, gamma) == q


@given(forms(PERT, 0))
def test_connection_squares_to_curvature(a):
    """D^2 a = (1/lam)[Omega, a] = 0 for scalar Omega, on arbitrary sections."""
    cfg = PERT
    gamma = fd.gamma_for(cfg)
    a = a.with_order(4)
    g = gamma.truncate(4)
    assert fd.connection(fd.connection(a, g, cfg), g, cfg).is_zero()


@pytest.mark.parametrize("cfg", [FLAT1, FLAT2])
@given(data=st.data())
def test_flat_star_is_moyal(cfg, data):
    u = data.draw(series(cfg.coords, degree=4, max_terms=3))
    v = data.draw(series(cfg.coords, degree=4, max_terms=3))
    assert fd.fedosov_star(u, v, cfg) == fd.moyal_base(u, v, cfg.symplectic)


@given(data=st.data())
def test_cached_star_matches_direct(data):
    u = data.draw(series(PERT2.coords, degree=3, max_terms=3))
    v = data.draw(series(PERT2.coords, degree=3, max_terms=3))
    assert fd.fedosov_star(u, v, PERT2) == fd.fedosov_star_direct(u, v, PERT2)


@given(data=st.data())
def test_perturbed_associative(data):
    u, v, w = (data.draw(series(PERT.coords, degree=3, max_terms=3)) for _ in range(3))
    star = lambda a, b: fd.fedosov_star(a, b, PERT)
    assert star(star(u, v), w) == star(u, star(v, w))
    assert star(u, B("1", PERT)) == u


def test_exp_star_examples():
    assert fd.exp_star_via_Q(B("0"), FLAT1) == B("1")
    lq = B("lam*q")
    expected = PolySeries.const(FLAT1.coords, 1)
    term = expected
    for k in range(1, 7):
        term = term * lq * Fraction(1, k)
        expected = expected + term
    assert fd.exp_star_via_Q(lq, FLAT1) == expected
    with pytest.raises(fd.FedosovError):
        fd.exp_star_via_Q(B("q"), FLAT1)


def test_exp_star_group_law_for_quadratic_generators():
    """exp_*(Phi(xi)) * exp_*(Phi(eta)) = exp_*(Phi(CH(xi, eta))) for sp(2) ~ sl(2), N = 4."""
    N = 4
    cfg = FLAT1.with_order(N)
    alg = sl2()
    V = cfg.coords
    q, p = PolySeries.var(V, "q", N), PolySeries.var(V, "p", N)
    images = [q * p, p * p * Fraction(1, 2), q * q * Fraction(-1, 2)]

    def phi(xi):
        out = PolySeries.zero(V, N)
        for c, img in zip(xi.coords, images):
            out = out + img * c
        return out

    xi = GVector(alg, (LambdaSeries([0, 1, 0, 0, 0], N), LambdaSeries([0, 0, 2, 0, 0], N),
                       LambdaSeries([0, -1, 1, 0, 0], N)))
    eta = GVector(alg, (LambdaSeries([0, 0, 1, 0, 0], N), LambdaSeries([0, 1, 0, 0, 0], N),
                        LambdaSeries([0, 2, 0, 0, 0], N)))
    lhs = fd.fedosov_star(fd.exp_star_via_Q(phi(xi), cfg), fd.exp_star_via_Q(phi(eta), cfg), cfg)
    rhs = fd.exp_star_via_Q(phi(ch_lambda(xi, eta, N)), cfg)
    assert lhs == rhs


def test_moyal_qmm_realizations():
    sd = FLAT1.symplectic
    q, p = B("q"), B("p")
    assert fd.moyal_qmm_check(h3(), [q, p, B("1")], sd).ok
    assert fd.moyal_qmm_check(sl2(), [q * p, p * p * Fraction(1, 2), q * q * Fraction(-1, 2)], sd).ok
    assert fd.moyal_qmm_check(abelian(2), [B("1"), B("3")], sd).ok
    # a wrong assignment is reported, not raised
    bad = fd.moyal_qmm_check(sl2(), [q * p, p * p, q * q], sd)
    assert not bad.ok and bad.failures


def test_config_loading(tmp_path):
    import json
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"dim": 2, "omega": [[0, -1], [1, 0]],
                                "perturbations": [[1, [[0, 1], [-1, 0]]]], "coords": ["q", "p"]}))
    assert fd.FedosovConfig.load(str(path)) == PERT
    path.write_text(json.dumps({"omega": [[0, -1], [1, 0]], "perturbations": [[1, [[0, "t"], ["-t", 0]]]]}))
    with pytest.raises(fd.FedosovError):
        fd.FedosovConfig.load(str(path))
    path.write_text(json.dumps({"omega": [[0, -1], [1, 0]], "perturbations": [[1, [[0, 1], [1, 0]]]]}))
    with pytest.raises(fd.FedosovError):
        fd.FedosovConfig.load(str(path))
