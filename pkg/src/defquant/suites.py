"""Seeded property suites.

Each suite is a function ``(ctx) -> list[CheckReport]``.  All randomness
comes from a ``random.Random`` seeded by the run seed and the suite name, so
a suite's report depends only on (seed, order, kappa) and never on which
other suites run or in which process.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from . import fedosov as fd
from . import orbit as ob
from .gutt import (KAPPA, exp_gutt, generator_extract, gutt_comm, gutt_mul, gutt_power, identity_realization,
                   strong_invariance_residual)
from .lie import GVector, LieAlgebra, ch_lambda, h3, kirillov_poisson, sl2, so3
from .report import CheckReport
from .series import LambdaSeries, Poly, PolySeries, compose, formal_shift, monomials_up_to

COEFFS = (-3, -2, -1, 1, 2, 3)

#: frozen lam-expansions of c_star(p^2) on the so(3) sphere, from squaring the Casimir in U(g_lam)
CSTAR_P2_GOLDEN = {
    "1": LambdaSeries([1, 0, Fraction(1, 3)], 6),
    "1 + lam^2": LambdaSeries([1, 0, Fraction(7, 3), 0, Fraction(4, 3)], 6),
}


@dataclass(frozen=True)
class SuiteContext:
    seed: int = 0
    order: Optional[int] = None
    kappa: Fraction = KAPPA

    def rng(self, name: str) -> random.Random:
        return random.Random(f"{self.seed}:{name}")

    def n(self, default: int) -> int:
        return default if self.order is None else self.order


# ---------------------------------------------------------------- sampling

def random_poly(rng: random.Random, variables: Sequence[str], degree: int, order: int, nterms: int = 4,
                lam_terms: bool = False) -> PolySeries:
    monos = monomials_up_to(len(variables), degree)
    terms: Dict = {}
    for _ in range(nterms):
        k = rng.randrange(2) if lam_terms else 0
        key = (k, rng.choice(monos))
        terms[key] = terms.get(key, 0) + rng.choice(COEFFS)
    return PolySeries(variables, terms, order)


def random_linear(rng: random.Random, alg: LieAlgebra, order: int) -> PolySeries:
    V = alg.coords
    out = PolySeries.zero(V, order)
    for v in V:
        out = out + PolySeries.var(V, v, order) * rng.randint(-3, 3)
    if out.is_zero():
        out = PolySeries.var(V, V[0], order)
    return out


def random_nilpotent(rng: random.Random, alg: LieAlgebra, order: int) -> GVector:
    """xi with coordinates a lam + b lam^2."""
    coords = []
    for _ in range(alg.dim):
        cs = [0] * (order + 1)
        if order >= 1:
            cs[1] = rng.randint(-2, 2)
        if order >= 2:
            cs[2] = rng.randint(-2, 2)
        coords.append(LambdaSeries(cs, order))
    return GVector(alg, tuple(coords))


def random_gvector(rng: random.Random, alg: LieAlgebra, order: int) -> GVector:
    return GVector(alg, tuple(LambdaSeries([rng.randint(-2, 2), rng.randint(-2, 2)] + [0] * (order - 1), order)
                              for _ in range(alg.dim)))


ALGEBRAS = (so3, sl2, h3)


# ---------------------------------------------------------------- suites

def suite_calculus(ctx: SuiteContext) -> List[CheckReport]:
    rng = ctx.rng("calculus")
    N = ctx.n(6)
    xs, ys = ("x1", "x2"), ("y1", "y2")
    auto = CheckReport("formal_shift is a ring morphism")
    subst = CheckReport("formal_shift equals substitution u(y + p)")
    comp = CheckReport("compose equals direct substitution")
    for _ in range(20):
        u1 = random_poly(rng, ys, 3, N, 3).coeff(0)
        u2 = random_poly(rng, ys, 3, N, 3).coeff(0)
        p = {y: random_poly(rng, xs, 2, N, 2) * PolySeries.lam(xs, N) for y in ys}
        lhs = formal_shift(u1 * u2, p, N)
        rhs = formal_shift(u1, p, N) * formal_shift(u2, p, N)
        auto.record(lhs == rhs, f"u1={u1}, u2={u2}")
        allv = xs + ys
        values = [PolySeries.var(allv, y, N) + p[y].rename(allv) for y in ys]
        direct = PolySeries.from_poly(u1.rename(allv), N).subs(
            [PolySeries.var(allv, x, N) for x in xs] + values)
        subst.record(formal_shift(u1, p, N) == direct, f"u={u1}")
    for _ in range(20):
        u = random_poly(rng, ys, 5, N, 4).coeff(0)
        v = [random_poly(rng, xs, 2, N, 3, lam_terms=True) for _ in ys]
        comp.record(compose(u, v, N) == PolySeries.from_poly(u, N).subs(v), f"u={u}")
    return [auto, subst, comp]


def suite_gutt_assoc(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(6)
    for make in ALGEBRAS:
        alg = make()
        rng = ctx.rng(f"gutt-assoc:{alg.name}")
        rep = CheckReport(f"associativity [{alg.name}]")
        V = alg.coords
        for _ in range(200):
            u, v, w = (random_poly(rng, V, 4, N) for _ in range(3))
            lhs = gutt_mul(alg, gutt_mul(alg, u, v), w)
            rhs = gutt_mul(alg, u, gutt_mul(alg, v, w))
            rep.record(lhs == rhs, f"u={u}, v={v}, w={w}")
        out.append(rep)
    return out


def suite_weyl(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(6)
    for make in ALGEBRAS:
        alg = make()
        rng = ctx.rng(f"weyl:{alg.name}")
        rep = CheckReport(f"xi^(*k) = xi^k, k <= 6 [{alg.name}]")
        for _ in range(50):
            xi = random_linear(rng, alg, N)
            power = PolySeries.const(alg.coords, 1, N)
            ok = True
            for k in range(1, 7):
                power = gutt_mul(alg, power, xi)
                ok = ok and power == xi ** k
            rep.record(ok, f"xi={xi}")
        out.append(rep)
    return out


def suite_strong_invariance(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(6)
    for make in ALGEBRAS:
        alg = make()
        rng = ctx.rng(f"strong-invariance:{alg.name}")
        inv = CheckReport(f"[xi, u]_* = kappa lam Pi(xi, u) [{alg.name}]")
        der = CheckReport(f"[xi, u * v]_* Leibniz rule [{alg.name}]")
        V = alg.coords
        for _ in range(100):
            xi = random_linear(rng, alg, N)
            u = random_poly(rng, V, 4, N)
            inv.record(strong_invariance_residual(alg, xi, u, ctx.kappa).is_zero(), f"xi={xi}, u={u}")
        for _ in range(100):
            xi = random_linear(rng, alg, N)
            u, v = random_poly(rng, V, 4, N, 3), random_poly(rng, V, 4, N, 3)
            lhs = gutt_comm(alg, xi, gutt_mul(alg, u, v))
            rhs = gutt_mul(alg, gutt_comm(alg, xi, u), v) + gutt_mul(alg, u, gutt_comm(alg, xi, v))
            der.record(lhs == rhs, f"xi={xi}, u={u}, v={v}")
        out += [inv, der]
    return out


def suite_exp_group(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(5)
    for make in ALGEBRAS:
        alg = make()
        rng = ctx.rng(f"exp-group:{alg.name}")
        rep = CheckReport(f"e^xi * e^eta = e^CH(xi, eta) [{alg.name}]")
        for _ in range(20):
            xi, eta = random_nilpotent(rng, alg, N), random_nilpotent(rng, alg, N)
            lhs = gutt_mul(alg, exp_gutt(xi), exp_gutt(eta))
            rhs = exp_gutt(ch_lambda(xi, eta, N))
            rep.record(lhs == rhs, f"xi={xi}, eta={eta}")
        out.append(rep)
    return out


def suite_bch(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(5)
    for make in ALGEBRAS:
        alg = make()
        rng = ctx.rng(f"bch:{alg.name}")
        rep = CheckReport(f"CH associativity [{alg.name}]")
        for _ in range(50):
            a, b, c = (random_gvector(rng, alg, N) for _ in range(3))
            lhs = ch_lambda(ch_lambda(a, b, N), c, N)
            rhs = ch_lambda(a, ch_lambda(b, c, N), N)
            rep.record(lhs == rhs, f"{a}, {b}, {c}")
        out.append(rep)
    alg = h3()
    heis = CheckReport("Heisenberg closed form")
    P, Q, Z = (GVector.basis_vector(alg, i, N) for i in range(3))
    heis.record(ch_lambda(P, Q, N) == P + Q + Z.scale(LambdaSeries([0, Fraction(1, 2)] + [0] * (N - 1), N)),
                "CH(P, Q) = P + Q + lam/2 Z")
    out.append(heis)
    return out


def suite_fedosov_flat(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(6)
    for n in (1, 2):
        cfg = fd.FedosovConfig(fd.SymplecticData.standard(n), order=N)
        rng = ctx.rng(f"fedosov-flat:{n}")
        g = CheckReport(f"gamma = 0 [n={n}]")
        g.record(fd.build_gamma(cfg).is_zero(), "gamma")
        rep = CheckReport(f"fedosov star = Moyal [n={n}]")
        for _ in range(50):
            u, v = random_poly(rng, cfg.coords, 4, N), random_poly(rng, cfg.coords, 4, N)
            rep.record(fd.fedosov_star(u, v, cfg) == fd.moyal_base(u, v, cfg.symplectic), f"u={u}, v={v}")
        out += [g, rep]
    return out


def perturbed_config(order: int) -> fd.FedosovConfig:
    """n = 1 with Omega = omega + lam dx1^dx2."""
    return fd.FedosovConfig(fd.SymplecticData.standard(1), ((1, ((0, 1), (-1, 0))),), order, ("q", "p"))


def weyl_curvature(cfg: fd.FedosovConfig, order: int) -> fd.WeylForm:
    return fd.symplectic_form(cfg, order) + fd.omega_form(cfg, order)


def suite_fedosov_perturbed(ctx: SuiteContext) -> List[CheckReport]:
    N = ctx.n(6)
    cfg = perturbed_config(N)
    rng = ctx.rng("fedosov-perturbed")
    gamma = fd.build_gamma(cfg)
    curv = CheckReport("curvature identity reproduces Omega")
    curv.record(fd.curvature(gamma, cfg) == weyl_curvature(cfg, N), "Omega")
    curv.record(fd.delta_inv(gamma, len(cfg.coords)).is_zero(), "delta^-1 gamma = 0")
    inv = fd.series_matrix_inverse(cfg.curvature_matrix())
    lin = CheckReport("linear commutators = lam (Omega^-1)^ij")
    V = cfg.coords
    lam = PolySeries.lam(V, N)
    for _ in range(20):
        u, v = random_poly(rng, V, 1, N, 3), random_poly(rng, V, 1, N, 3)
        lhs = fd.fedosov_star(u, v, cfg) - fd.fedosov_star(v, u, cfg)
        rhs = PolySeries.zero(V, N)
        for i in range(len(V)):
            for j in range(len(V)):
                rhs = rhs + u.diff(i) * v.diff(j) * inv[i][j]
        lin.record(lhs == lam * rhs, f"u={u}, v={v}")
    flat = CheckReport("D Q(u) = 0 and sigma Q(u) = u")
    for _ in range(10):
        u = random_poly(rng, V, 3, N, 3)
        q = fd.quantize(u, cfg, gamma)
        Du = fd.connection(fd.WeylForm.scalar(q), gamma, cfg)
        flat.record(Du.is_zero() and fd.sigma(q, cfg) == u, f"u={u}")
    assoc = CheckReport("associativity")
    for _ in range(50):
        u, v, w = (random_poly(rng, V, 3, N, 3) for _ in range(3))
        lhs = fd.fedosov_star(fd.fedosov_star(u, v, cfg), w, cfg)
        rhs = fd.fedosov_star(u, fd.fedosov_star(v, w, cfg), cfg)
        assoc.record(lhs == rhs, f"u={u}, v={v}, w={w}")
    return [curv, lin, flat, assoc]


ORBIT_CONSTANTS = ("1", "1 + lam^2")


def _checked_reduce(u, spec, rep: CheckReport):
    nf, cert = ob.reduce(u, spec)
    rep.record(ob.certificate_residual(u, nf, cert, spec).is_zero(), f"u={u}")
    return nf


def suite_orbit(ctx: SuiteContext) -> List[CheckReport]:
    out = []
    N = ctx.n(6)
    for c in ORBIT_CONSTANTS:
        spec = ob.so3_sphere(c, N)
        alg = spec.algebra
        V = spec.variables
        rng = ctx.rng(f"orbit:{c}")
        tag = f"[c = {c}]"
        valid = CheckReport(f"spec validates {tag}")
        valid.record(ob.validate_spec(spec).ok, "validate_spec")
        central = CheckReport(f"p - c star-central on monomials of degree <= 4 {tag}")
        pc = spec.star_generators[0]
        for e in monomials_up_to(3, 4):
            m = PolySeries(V, {(0, e): 1}, N)
            central.record(gutt_comm(alg, pc, m).is_zero(), f"mu^{e}")
        cert = CheckReport(f"reduce certificate identity {tag}")
        assoc = CheckReport(f"quotient associativity {tag}")
        for _ in range(100):
            a, b, d = (_checked_reduce(random_poly(rng, V, 3, N, 3), spec, cert) for _ in range(3))
            ab = _checked_reduce(gutt_mul(alg, a, b), spec, cert)
            bd = _checked_reduce(gutt_mul(alg, b, d), spec, cert)
            lhs = _checked_reduce(gutt_mul(alg, ab, d), spec, cert)
            rhs = _checked_reduce(gutt_mul(alg, a, bd), spec, cert)
            assoc.record(lhs == rhs, f"a={a}, b={b}, c={d}")
        hom = CheckReport(f"qmm multiplicative {tag}")
        for _ in range(100):
            u, v = random_poly(rng, V, 3, N, 3), random_poly(rng, V, 3, N, 3)
            lhs = _checked_reduce(gutt_mul(alg, u, v), spec, cert)
            rhs = ob.quotient_mul(_checked_reduce(u, spec, cert), _checked_reduce(v, spec, cert), spec)
            hom.record(lhs == rhs, f"u={u}, v={v}")
        ideal = CheckReport(f"ideal elements reduce to 0 {tag}")
        for _ in range(50):
            u = random_poly(rng, V, 3, N, 3)
            ideal.record(_checked_reduce(gutt_mul(alg, u, pc), spec, cert).is_zero()
                         and _checked_reduce(gutt_mul(alg, pc, u), spec, cert).is_zero(), f"u={u}")
        dim = CheckReport(f"normal monomials of degree <= d number (d+1)^2 {tag}")
        for d in range(5):
            dim.record(ob.count_normal_monomials(spec, d) == (d + 1) ** 2, f"d={d}")
        out += [valid, central, cert, assoc, hom, ideal, dim]
    kern = CheckReport("reduce_c(p - c') = c - c'")
    s1, s2 = (ob.so3_sphere(c, N) for c in ORBIT_CONSTANTS)
    for sa, sb in ((s1, s2), (s2, s1), (s1, s1)):
        p_minus = PolySeries.from_poly(sa.generators[0], N) - PolySeries.const(sa.variables, sb.constants[0], N)
        nf = ob.normal_form(p_minus, sa)
        kern.record(nf.is_constant() and nf.constant_series() == sa.constants[0] - sb.constants[0],
                    f"{sa.constants[0]} vs {sb.constants[0]}")
    out.append(kern)
    return out


def sl2_moyal_images(order: int) -> List[PolySeries]:
    """H = qp, E = p^2/2, F = -q^2/2, so that {H, E} = 2E, {H, F} = -2F, {E, F} = H."""
    V = ("q", "p")
    q, p = PolySeries.var(V, "q", order), PolySeries.var(V, "p", order)
    return [q * p, p * p * Fraction(1, 2), q * q * Fraction(-1, 2)]


def h3_moyal_images(order: int) -> List[PolySeries]:
    V = ("q", "p")
    return [PolySeries.var(V, "q", order), PolySeries.var(V, "p", order), PolySeries.const(V, 1, order)]


def suite_qmm_axioms(ctx: SuiteContext) -> List[CheckReport]:
    N = ctx.n(6)
    out = []
    for c in ORBIT_CONSTANTS:
        rep = ob.qmm_axiom_check(ob.so3_sphere(c, N), 3, ctx.kappa)
        rep.name += f" [c = {c}]"
        out.append(rep)
    sd = fd.SymplecticData.standard(1)
    out.append(fd.moyal_qmm_check(h3(), h3_moyal_images(N), sd, 3, ctx.kappa))
    out.append(fd.moyal_qmm_check(sl2(), sl2_moyal_images(N), sd, 3, ctx.kappa))
    return out


def suite_cstar(ctx: SuiteContext) -> List[CheckReport]:
    N = ctx.n(6)
    out = []
    for c in ORBIT_CONSTANTS:
        spec = ob.so3_sphere(c, N)
        const = CheckReport(f"c_star(p^k) constant, k <= 3 [c = {c}]")
        for k in range(4):
            try:
                ob.c_star(f"p^{k}", spec)
                const.record(True)
            except ob.NotConstantError as exc:
                const.record(False, str(exc))
        first = CheckReport(f"c_star(p) = c [c = {c}]")
        first.record(ob.c_star("p", spec) == spec.constants[0], "c_star(p)")
        golden = CheckReport(f"c_star(p^2) golden value [c = {c}]")
        golden.record(ob.c_star("p^2", spec) == CSTAR_P2_GOLDEN[c].truncate(N), str(ob.c_star("p^2", spec)))
        out += [const, first, golden]
    return out


def suite_scoeff(ctx: SuiteContext) -> List[CheckReport]:
    N = ctx.n(6)
    out = []
    for c in ORBIT_CONSTANTS:
        spec = ob.so3_sphere(c, N)
        V = spec.variables
        sc = ob.s_coefficients(spec, 2, 3)
        zero = (0,) * len(V)
        base = CheckReport(f"T_0,0 = 1 [c = {c}]")
        base.record(sc.coefficients[(zero, 0)] == Poly.const(V, 1), str(sc.coefficients[(zero, 0)]))
        lin = CheckReport(f"T_l,1 = 0 [c = {c}]")
        for l in range(len(V)):
            e = tuple(int(i == l) for i in range(len(V)))
            lin.record(sc.coefficients[(e, 1)].is_zero(), f"l={V[l]}")
        rec = CheckReport(f"reconstruction identity, degree <= 3, j <= 2 [c = {c}]")
        for key, r in sorted(sc.residuals.items()):
            rec.record(r.is_zero(), f"{key}: {r}")
        out += [base, lin, rec]
    return out


def suite_gen_extract(ctx: SuiteContext) -> List[CheckReport]:
    N = ctx.n(6)
    alg = so3()
    V = alg.coords
    ident = identity_realization(alg, N)
    spec = ob.so3_sphere(1, N)
    quot = ob.quotient_realization(spec)
    a = CheckReport("identity realization gives mu^J")
    b = CheckReport("quotient realization gives reduce(mu^J)")
    for J in monomials_up_to(3, 3):
        mono = PolySeries(V, {(0, J): 1}, N)
        a.record(generator_extract(ident, J, 3) == mono, f"J={J}")
        b.record(generator_extract(quot, J, 3) == ob.normal_form(mono, spec), f"J={J}")
    return [a, b]


SUITES: Dict[str, Callable[[SuiteContext], List[CheckReport]]] = {
    "calculus": suite_calculus,
    "gutt-assoc": suite_gutt_assoc,
    "weyl": suite_weyl,
    "strong-invariance": suite_strong_invariance,
    "exp-group": suite_exp_group,
    "bch": suite_bch,
    "fedosov-flat": suite_fedosov_flat,
    "fedosov-perturbed": suite_fedosov_perturbed,
    "orbit": suite_orbit,
    "qmm-axioms": suite_qmm_axioms,
    "cstar": suite_cstar,
    "scoeff": suite_scoeff,
    "gen-extract": suite_gen_extract,
}


@dataclass
class SuiteResult:
    suite: str
    checks: List[CheckReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "checks": [c.as_dict() for c in self.checks]}


def resolve(selection: Sequence[str]) -> List[str]:
    names: List[str] = []
    for s in selection:
        if s == "all":
            names += list(SUITES)
        elif s in SUITES:
            names.append(s)
        else:
            raise KeyError(s)
    return list(dict.fromkeys(names))


def run_one(name: str, ctx: SuiteContext) -> SuiteResult:
    return SuiteResult(name, SUITES[name](ctx))


def run_suites(selection: Sequence[str], ctx: SuiteContext, parallel: int = 1) -> List[SuiteResult]:
    """Run the selected suites; results come back in registry order regardless of scheduling."""
    names = resolve(selection)
    if parallel > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(run_one, names, [ctx] * len(names)))
    else:
        results = [run_one(n, ctx) for n in names]
    order = {n: i for i, n in enumerate(SUITES)}
    return sorted(results, key=lambda r: order[r.suite])
