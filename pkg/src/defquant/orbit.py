"""Star products on regular coadjoint orbits as quotients of the Gutt algebra.

The orbit algebra is (Pol(g*)[[lam]], *G) modulo the two-sided ideal
generated by p_j - c_j, where the p_j are Casimirs and c_j are constant
lam-series.  ``reduce`` picks a canonical representative order by order in
lam: divide the current lam^k residue by a commutative Groebner basis of
<p_j - c_{j,0}>, and subtract lam^k q_j *G (p_j - c_j) for the quotients.
The quantum moment map is this projection.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

from .expr import parse
from .groebner import GroebnerBasis, buchberger
from .gutt import KAPPA, Realization, gutt_comm, gutt_mul
from .lie import LieAlgebra, kirillov_poisson, load_algebra
from .report import CheckReport
from .series import DEFAULT_ORDER, LambdaSeries, Poly, PolySeries, monomials_up_to, multi_factorial

Exps = Tuple[int, ...]

#: canonical representatives are plain PolySeries whose coefficients are all reduced
NormalForm = PolySeries


class SpecError(ValueError):
    pass


class NotConstantError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OrbitSpec:
    algebra: LieAlgebra
    names: Tuple[str, ...]
    generators: Tuple[Poly, ...]
    constants: Tuple[LambdaSeries, ...]
    monomial_order: str = "lex"
    variable_order: Tuple[str, ...] = None
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        V = tuple(self.algebra.coords)
        if self.variable_order is None:
            object.__setattr__(self, "variable_order", V)
        if sorted(self.variable_order) != sorted(V):
            raise SpecError("variable order must be a permutation of the coordinates")
        if not (len(self.names) == len(self.generators) == len(self.constants)):
            raise SpecError("need one constant per generator")
        for g in self.generators:
            if g.variables != V:
                raise SpecError(f"generators must be polynomials in {V}")
        object.__setattr__(self, "constants", tuple(
            c if isinstance(c, LambdaSeries) else LambdaSeries.const(c, self.order) for c in self.constants))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self.algebra.coords)

    @cached_property
    def groebner(self) -> GroebnerBasis:
        V = self.variables
        perm = tuple(V.index(v) for v in self.variable_order)
        gens = [g - c.coeffs[0] for g, c in zip(self.generators, self.constants)]
        return buchberger(gens, self.monomial_order, perm)

    @cached_property
    def star_generators(self) -> Tuple[PolySeries, ...]:
        """p_j - c_j as series."""
        return tuple(PolySeries.from_poly(g, self.order) - PolySeries.const(self.variables, c, self.order)
                     for g, c in zip(self.generators, self.constants))

    def with_constants(self, constants) -> "OrbitSpec":
        return OrbitSpec(self.algebra, self.names, self.generators, tuple(constants), self.monomial_order,
                         self.variable_order, self.order)

    def with_order(self, order: int) -> "OrbitSpec":
        return OrbitSpec(self.algebra, self.names, self.generators,
                         tuple(LambdaSeries(c.coeffs, order) for c in self.constants),
                         self.monomial_order, self.variable_order, order)

    @classmethod
    def from_dict(cls, cfg: dict, base_dir: str = ".") -> "OrbitSpec":
        try:
            ref = cfg["algebra"]
            if isinstance(ref, dict):
                alg = LieAlgebra.from_config(ref)
            else:
                path = os.path.join(base_dir, ref)
                alg = load_algebra(ref if not os.path.exists(path) else path)
            order = int(cfg.get("truncation", DEFAULT_ORDER))
            gens = cfg["generators"]
            consts = cfg["constants"]
        except KeyError as exc:
            raise SpecError(f"orbit spec is missing {exc}") from exc
        names = tuple(gens)
        V = tuple(alg.coords)
        polys = []
        for n in names:
            s = parse(gens[n], V, order)
            if s.lambda_valuation() == 0 and any(k for (k, _) in s.terms):
                raise SpecError(f"generator {n} must not depend on lam")
            polys.append(s.coeff(0))
        cs = []
        for n in names:
            s = parse(str(consts[n]), (), order)
            cs.append(s.constant_series())
        return cls(alg, names, tuple(polys), tuple(cs), cfg.get("monomial_order", "lex"),
                   tuple(cfg["variable_order"]) if "variable_order" in cfg else None, order)

    @classmethod
    def load(cls, path: str) -> "OrbitSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), os.path.dirname(os.path.abspath(path)))


def so3_sphere(c=1, order: int = DEFAULT_ORDER) -> OrbitSpec:
    from .lie import so3
    alg = so3()
    V = alg.coords
    p = parse("x^2 + y^2 + z^2", V, order).coeff(0)
    if not isinstance(c, LambdaSeries):
        c = LambdaSeries.const(c, order) if not isinstance(c, str) else parse(c, (), order).constant_series()
    return OrbitSpec(alg, ("p",), (p,), (c,), "lex", ("x", "y", "z"), order)


@dataclass
class ValidationReport:
    ok: bool = True
    messages: List[str] = field(default_factory=list)

    def fail(self, msg: str):
        self.ok = False
        self.messages.append(msg)


def _jacobian_rank_ok(spec: OrbitSpec) -> bool:
    """Some r x r minor of d(p_j)/d(mu_l) survives reduction modulo the fiber ideal."""
    from itertools import combinations
    V = spec.variables
    r = len(spec.generators)
    J = [[g.diff(v) for v in V] for g in spec.generators]

    def det(rows, cols):
        if len(rows) == 1:
            return J[rows[0]][cols[0]]
        out = Poly(V)
        for t, c in enumerate(cols):
            rest = cols[:t] + cols[t + 1:]
            term = J[rows[0]][c] * det(rows[1:], rest)
            out = out + term if t % 2 == 0 else out - term
        return out

    G = spec.groebner
    for cols in combinations(range(len(V)), r):
        m = det(list(range(r)), list(cols))
        if not G.reduce(m).is_zero():
            return True
    return False


def validate_spec(spec: OrbitSpec) -> ValidationReport:
    """Poisson centrality, star centrality and regularity of the generators."""
    rep = ValidationReport()
    alg = spec.algebra
    V = spec.variables
    N = spec.order
    for name, g in zip(spec.names, spec.generators):
        for l, v in enumerate(V):
            mu = Poly.var(V, v)
            if not kirillov_poisson(g, mu, alg).is_zero():
                rep.fail(f"centrality violated: Pi({name}, {v}) != 0")
            gs = PolySeries.from_poly(g, N)
            if not gutt_comm(alg, gs, PolySeries.var(V, v, N)).is_zero():
                rep.fail(f"star centrality violated: [{name}, {v}]_* != 0")
    if rep.ok:
        G = spec.groebner
        if any(g.is_constant() for g in G.polys):
            rep.fail("the fiber ideal is the unit ideal (empty level set)")
        elif not _jacobian_rank_ok(spec):
            rep.fail("rank deficiency: the generators are not independent on the fiber")
    return rep


def require_valid(spec: OrbitSpec):
    rep = validate_spec(spec)
    if not rep.ok:
        raise SpecError("; ".join(rep.messages))


def reduce(u: PolySeries, spec: OrbitSpec) -> Tuple[NormalForm, Tuple[PolySeries, ...]]:
    """Normal form of u and a certificate g with u = nf + sum_i g_i *G (p_i - c_i)."""
    alg = spec.algebra
    V = spec.variables
    if u.variables != V:
        raise SpecError(f"expected a series in {V}")
    N = min(u.order, spec.order)
    G = spec.groebner
    lifts = [s.with_order(N) for s in spec.star_generators]
    residue = u.with_order(N)
    cert = [PolySeries.zero(V, N) for _ in spec.generators]
    nf: Dict[Tuple[int, Exps], Fraction] = {}
    for k in range(N + 1):
        rk = residue.coeff(k)
        if rk.is_zero():
            continue
        Q, rem = G.generator_quotients(rk)
        for i, q in enumerate(Q):
            if q.is_zero():
                continue
            qs = PolySeries.from_poly(q, N, k)
            cert[i] = cert[i] + qs
            residue = residue - gutt_mul(alg, qs, lifts[i])
        if residue.coeff(k) != rem:
            raise ArithmeticError("reduction step left a non-normal residue")
        for e, c in rem.terms.items():
            nf[(k, e)] = c
    return PolySeries(V, nf, N), tuple(cert)


def normal_form(u: PolySeries, spec: OrbitSpec) -> NormalForm:
    return reduce(u, spec)[0]


def qmm(u: PolySeries, spec: OrbitSpec) -> NormalForm:
    """The quantum moment map: projection onto the orbit algebra."""
    return reduce(u, spec)[0]


def quotient_mul(a: NormalForm, b: NormalForm, spec: OrbitSpec) -> NormalForm:
    return reduce(gutt_mul(spec.algebra, a, b), spec)[0]


def quotient_comm(a: NormalForm, b: NormalForm, spec: OrbitSpec) -> NormalForm:
    return quotient_mul(a, b, spec) - quotient_mul(b, a, spec)


def lift(phi: NormalForm, spec: OrbitSpec) -> PolySeries:
    """Canonical lift: the normal-form representative itself."""
    return phi


def certificate_residual(u: PolySeries, nf: NormalForm, cert, spec: OrbitSpec) -> PolySeries:
    """u - nf - sum_i g_i *G (p_i - c_i); zero for a correct reduction."""
    N = nf.order
    out = u.with_order(N) - nf
    for g, s in zip(cert, spec.star_generators):
        out = out - gutt_mul(spec.algebra, g, s.with_order(N))
    return out


def quotient_realization(spec: OrbitSpec) -> Realization:
    V = spec.variables
    imgs = tuple(qmm(PolySeries.var(V, v, spec.order), spec) for v in V)
    return Realization(imgs, lambda a, b: quotient_mul(a, b, spec))


def c_star(l, spec: OrbitSpec) -> LambdaSeries:
    """c_*(l) for l a polynomial in the generators (given as text or as a series in their names)."""
    names = spec.names
    if isinstance(l, str):
        l = parse(l, names, spec.order)
    if isinstance(l, Poly):
        l = PolySeries.from_poly(l, spec.order)
    if l.variables != names:
        raise SpecError(f"c_star expects a polynomial in {names}")
    V = spec.variables
    values = [PolySeries.from_poly(g, spec.order) for g in spec.generators]
    u = l.subs(values) if names else l
    nf = qmm(u, spec)
    if not nf.is_constant():
        raise NotConstantError(f"reduction of {l} is not constant: {nf}")
    return nf.constant_series()


def count_normal_monomials(spec: OrbitSpec, degree: int) -> int:
    G = spec.groebner
    return sum(1 for e in monomials_up_to(len(spec.variables), degree) if G.is_normal(e))


def qmm_axiom_check(spec: OrbitSpec, max_degree: int = 3, kappa=KAPPA) -> CheckReport:
    """[Phi(X_a), Phi(X_b)]_* = Phi([X_a, X_b]_lam) and [Phi(X_a), u]_* = lam kappa Pi(mu_a, u) on the orbit."""
    alg = spec.algebra
    V = spec.variables
    N = spec.order
    rep = CheckReport(f"orbit-qmm[{alg.name}]")
    lam = PolySeries.lam(V, N)
    mus = [PolySeries.var(V, v, N) for v in V]
    imgs = [qmm(m, spec) for m in mus]
    for a in range(alg.dim):
        for b in range(alg.dim):
            br = PolySeries.zero(V, N)
            for k, c in alg.table[a][b]:
                br = br + mus[k] * c
            rep.record(quotient_comm(imgs[a], imgs[b], spec) == qmm(lam * br, spec),
                       f"qmm3 ({alg.basis[a]},{alg.basis[b]})")
    for a in range(alg.dim):
        for e in monomials_up_to(len(V), max_degree):
            u = qmm(PolySeries(V, {(0, e): 1}, N), spec)
            lhs = quotient_comm(imgs[a], u, spec)
            rhs = qmm(lam * kirillov_poisson(mus[a], u, alg) * kappa, spec)
            rep.record(lhs == rhs, f"qmm2 ({alg.basis[a]}, {u})")
    return rep


@dataclass
class SCoefficients:
    coefficients: Dict[Tuple[Exps, int], Poly]
    residuals: Dict[Tuple[Exps, int], Poly]
    checked: int

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())


def s_coefficients(spec: OrbitSpec, max_j: int = 2, max_degree: int = 3) -> SCoefficients:
    """Solve qmm(u) = sum_j lam^j sum_{|I| <= 2j} T_{I,j} Phi_0(d^I u) for the T_{I,j}.

    On monomials the system is triangular: d^J mu^J = J! is the only term of
    top multi-index, so T_{J,j} is read off after subtracting the smaller
    multi-indices.  Monomials with |J| > 2j are pure consistency checks and
    their residuals are reported.
    """
    V = spec.variables
    n = len(V)
    G = spec.groebner
    N = spec.order
    max_j = min(max_j, N)
    deg_needed = max(max_degree, 2 * max_j)
    monos = monomials_up_to(n, deg_needed)
    qvals = {e: qmm(PolySeries(V, {(0, e): 1}, N), spec) for e in monos}

    def phi0(p: Poly) -> Poly:
        return G.reduce(p)

    def expansion(e: Exps, j: int, T) -> Poly:
        mu = Poly.monomial(V, e)
        acc = Poly(V)
        for I in monomials_up_to(n, min(2 * j, sum(e))):
            t = T.get((I, j))
            if t is None or t.is_zero():
                continue
            d = mu.D_multi(I)
            if d.is_zero():
                continue
            acc = acc + t * phi0(d)
        return G.reduce(acc)

    T: Dict[Tuple[Exps, int], Poly] = {}
    residuals: Dict[Tuple[Exps, int], Poly] = {}
    checked = 0
    for j in range(max_j + 1):
        for e in monos:
            target = qvals[e].coeff(j)
            if sum(e) <= 2 * j:
                partial = expansion(e, j, T)
                T[(e, j)] = G.reduce((target - partial) * Fraction(1, multi_factorial(e)))
            if sum(e) <= max_degree:
                checked += 1
                residuals[(e, j)] = G.reduce(target - expansion(e, j, T))
    return SCoefficients({k: v for k, v in T.items()}, residuals, checked)


def reconstruct(u: PolySeries, spec: OrbitSpec, sc: SCoefficients, max_j: int) -> PolySeries:
    """sum_j lam^j sum_I T_{I,j} Phi_0(d^I u) for a lam-free u."""
    V = spec.variables
    G = spec.groebner
    out = {}
    u0 = u.coeff(0)
    for j in range(max_j + 1):
        acc = Poly(V)
        for (I, jj), t in sc.coefficients.items():
            if jj != j or t.is_zero():
                continue
            d = u0.D_multi(I)
            if not d.is_zero():
                acc = acc + t * G.reduce(d)
        for e, c in G.reduce(acc).terms.items():
            out[(j, e)] = c
    return PolySeries(V, out, max_j)
