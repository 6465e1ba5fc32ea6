"""The universal enveloping algebra U(g_lam) and the Gutt star product.

Elements of U(g_lam) are kept in PBW normal form: a dict mapping
``(k, J)`` to a rational, standing for lam^k X_1^{j_1} ... X_n^{j_n}.
Reordering X_j X_i -> X_i X_j + lam [X_j, X_i] costs one power of lam, so
every product is finite once lam is truncated.

The Gutt product transports the U(g_lam) product back to polynomials on g*
through the symmetrization map:  u * v = s^{-1}(s(u) s(v)).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Sequence, Tuple

from .lie import GVector, LieAlgebra, ch_lambda, kirillov_poisson
from .series import DEFAULT_ORDER, LambdaSeries, PolySeries, exp_nilpotent, monomials_up_to, multi_factorial

Exps = Tuple[int, ...]
Terms = Dict[Tuple[int, Exps], Fraction]

#: convention constant for gutt_comm(xi, u) = KAPPA * lam * Pi(xi, u)
KAPPA = Fraction(1)


def _acc(out: Terms, key, c):
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class PBWEngine:
    """Memoized PBW arithmetic for one algebra at one truncation order.

    Cache entries are written once and never mutated; a lock guards the
    writes so that concurrent readers never observe a half-built entry.
    Results do not depend on whether caching is enabled.
    """

    def __init__(self, alg: LieAlgebra, order: int, use_cache: bool = True):
        self.alg = alg
        self.order = order
        self.n = alg.dim
        self.use_cache = use_cache
        self._lmul: Dict[Tuple[int, Exps, int], Terms] = {}
        self._sym: Dict[Exps, Terms] = {}
        self._star: Dict[Tuple[Exps, Exps], Terms] = {}
        self._pbw: Dict[Tuple[Exps, Exps], Terms] = {}
        self._unsym: Dict[Exps, Terms] = {}
        self._lock = threading.Lock()

    def _store(self, cache, key, value):
        if self.use_cache:
            with self._lock:
                cache.setdefault(key, value)
        return value

    def lmul_gen(self, i: int, K: Exps, budget: int) -> Terms:
        """X_i * X^K in normal form, keeping lam powers <= budget."""
        key = (i, K, budget)
        hit = self._lmul.get(key) if self.use_cache else None
        if hit is not None:
            return hit
        j = next((m for m, d in enumerate(K) if d), None)
        if j is None or i <= j:
            K2 = K[:i] + (K[i] + 1,) + K[i + 1:]
            return self._store(self._lmul, key, {(0, K2): Fraction(1)})
        # X_i X_j X^{K'} = X_j (X_i X^{K'}) + lam [X_i, X_j] X^{K'}, with j < i
        Kp = K[:j] + (K[j] - 1,) + K[j + 1:]
        out: Terms = {}
        for (k, M), c in self.lmul_gen(i, Kp, budget).items():
            for (k2, M2), c2 in self.lmul_gen(j, M, budget - k).items():
                _acc(out, (k + k2, M2), c * c2)
        if budget >= 1:
            for m, cm in self.alg.table[i][j]:
                for (k, M), c in self.lmul_gen(m, Kp, budget - 1).items():
                    _acc(out, (k + 1, M), cm * c)
        return self._store(self._lmul, key, out)

    def lmul_elem(self, i: int, A: Terms) -> Terms:
        out: Terms = {}
        for (k, K), c in A.items():
            for (k2, M), c2 in self.lmul_gen(i, K, self.order - k).items():
                _acc(out, (k + k2, M), c * c2)
        return out

    def mul(self, A: Terms, B: Terms) -> Terms:
        """Product in U(g_lam).  X^J B is built by left-multiplying generators."""
        out: Terms = {}
        groups: Dict[Exps, Dict[int, Fraction]] = {}
        for (k, J), c in A.items():
            groups.setdefault(J, {})[k] = c
        for J, coeffs in groups.items():
            kmin = min(coeffs)
            cur = {key: c for key, c in B.items() if key[0] + kmin <= self.order}
            for gen in reversed([g for g, d in enumerate(J) for _ in range(d)]):
                cur = self.lmul_elem(gen, cur)
            for (k2, M), c2 in cur.items():
                for k, c in coeffs.items():
                    if k + k2 <= self.order:
                        _acc(out, (k + k2, M), c * c2)
        return out

    def sym_monomial(self, J: Exps) -> Terms:
        """s(mu^J), via s(mu^J) = sum_i (j_i / |J|) X_i s(mu^{J - e_i})."""
        hit = self._sym.get(J) if self.use_cache else None
        if hit is not None:
            return hit
        d = sum(J)
        if d == 0:
            return self._store(self._sym, J, {(0, J): Fraction(1)})
        out: Terms = {}
        for i, ji in enumerate(J):
            if not ji:
                continue
            sub = self.sym_monomial(J[:i] + (ji - 1,) + J[i + 1:])
            for key, c in self.lmul_elem(i, sub).items():
                _acc(out, key, c * Fraction(ji, d))
        return self._store(self._sym, J, out)

    def symmetrize(self, terms: Terms) -> Terms:
        out: Terms = {}
        for (k, J), c in terms.items():
            for (k2, M), c2 in self.sym_monomial(J).items():
                if k + k2 <= self.order:
                    _acc(out, (k + k2, M), c * c2)
        return out

    def unsymmetrize(self, A: Terms) -> Terms:
        """Inverse of symmetrize by peeling off top-degree PBW monomials."""
        rest = dict(A)
        out: Terms = {}
        while rest:
            top = max(sum(J) for (_, J) in rest)
            lead = [(key, c) for key, c in rest.items() if sum(key[1]) == top]
            for (k, J), c in lead:
                _acc(out, (k, J), c)
                for (k2, M), c2 in self.sym_monomial(J).items():
                    if k + k2 <= self.order:
                        _acc(rest, (k + k2, M), -c * c2)
        return out


    def pbw_monomials(self, J: Exps, K: Exps) -> Terms:
        """X^J X^K in normal form; X^J = X_i X^{J - e_i} for the smallest i present."""
        key = (J, K)
        hit = self._pbw.get(key) if self.use_cache else None
        if hit is not None:
            return hit
        i = next((m for m, d in enumerate(J) if d), None)
        if i is None:
            return self._store(self._pbw, key, {(0, K): Fraction(1)})
        rest = self.pbw_monomials(J[:i] + (J[i] - 1,) + J[i + 1:], K)
        return self._store(self._pbw, key, self.lmul_elem(i, rest))

    def unsym_monomial(self, J: Exps) -> Terms:
        """s^{-1}(X^J): mu^J minus the inverse images of the lower terms of s(mu^J)."""
        hit = self._unsym.get(J) if self.use_cache else None
        if hit is not None:
            return hit
        out: Terms = {(0, J): Fraction(1)}
        for (k, M), c in self.sym_monomial(J).items():
            if k == 0:
                continue
            for (k2, M2), c2 in self.unsym_monomial(M).items():
                if k + k2 <= self.order:
                    _acc(out, (k + k2, M2), -c * c2)
        return self._store(self._unsym, J, out)

    def star_monomials(self, A: Exps, B: Exps) -> Terms:
        """mu^A * mu^B for the Gutt product, memoized per pair."""
        key = (A, B)
        hit = self._star.get(key) if self.use_cache else None
        if hit is not None:
            return hit
        prod: Terms = {}
        for (k1, J), c1 in self.sym_monomial(A).items():
            for (k2, K), c2 in self.sym_monomial(B).items():
                if k1 + k2 > self.order:
                    continue
                c = c1 * c2
                for (k3, M), c3 in self.pbw_monomials(J, K).items():
                    if k1 + k2 + k3 <= self.order:
                        _acc(prod, (k1 + k2 + k3, M), c * c3)
        out: Terms = {}
        for (k, M), c in prod.items():
            for (k2, M2), c2 in self.unsym_monomial(M).items():
                if k + k2 <= self.order:
                    _acc(out, (k + k2, M2), c * c2)
        return self._store(self._star, key, out)

    def star(self, u: Terms, v: Terms) -> Terms:
        """Gutt product of two term dicts, bilinear in the memoized monomial products."""
        out: Terms = {}
        for (k1, A), c1 in u.items():
            for (k2, B), c2 in v.items():
                room = self.order - k1 - k2
                if room < 0:
                    continue
                c = c1 * c2
                for (k, M), c3 in self.star_monomials(A, B).items():
                    if k <= room:
                        _acc(out, (k + k1 + k2, M), c * c3)
        return out


_ENGINES: Dict[Tuple[LieAlgebra, int], PBWEngine] = {}
_ENGINES_LOCK = threading.Lock()


def engine(alg: LieAlgebra, order: int) -> PBWEngine:
    key = (alg, order)
    eng = _ENGINES.get(key)
    if eng is None:
        with _ENGINES_LOCK:
            eng = _ENGINES.setdefault(key, PBWEngine(alg, order))
    return eng


@dataclass(frozen=True)
class UEAElement:
    """PBW-normal element of U(g_lam); ``terms`` maps (k, J) to a rational."""

    algebra: LieAlgebra
    terms: Tuple[Tuple[Tuple[int, Exps], Fraction], ...]
    order: int

    @classmethod
    def from_terms(cls, alg, terms: Terms, order):
        return cls(alg, tuple(sorted((key, c) for key, c in terms.items() if c and key[0] <= order)), order)

    @classmethod
    def unit(cls, alg, order=DEFAULT_ORDER):
        return cls.from_terms(alg, {(0, (0,) * alg.dim): Fraction(1)}, order)

    def as_dict(self) -> Terms:
        return dict(self.terms)

    def coefficients(self) -> Dict[Exps, LambdaSeries]:
        """PBW monomial -> lam-series coefficient."""
        out: Dict[Exps, list] = {}
        for (k, J), c in self.terms:
            out.setdefault(J, [Fraction(0)] * (self.order + 1))[k] = c
        return {J: LambdaSeries(cs, self.order) for J, cs in out.items()}

    def degree(self) -> int:
        """Grading deg(X^J lam^k) = 2|J| + 2k."""
        return max((2 * sum(J) + 2 * k for (k, J), _ in self.terms), default=0)

    def __mul__(self, other: "UEAElement") -> "UEAElement":
        if self.algebra != other.algebra:
            raise ValueError("algebra mismatch")
        order = min(self.order, other.order)
        eng = engine(self.algebra, order)
        return UEAElement.from_terms(self.algebra, eng.mul(self.as_dict(), other.as_dict()), order)

    def __add__(self, other):
        t = self.as_dict()
        for key, c in other.terms:
            _acc(t, key, c)
        return UEAElement.from_terms(self.algebra, t, min(self.order, other.order))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "UEAElement":
        return UEAElement.from_terms(self.algebra, {key: v * c for key, v in self.terms}, self.order)

    def __str__(self):
        s = PolySeries(self.algebra.basis, dict(self.terms), self.order)
        return str(s)


def straighten(alg: LieAlgebra, word: Sequence[int], coeff=None, order: int = DEFAULT_ORDER) -> UEAElement:
    """Normal form of coeff * X_{w_1} ... X_{w_m}."""
    if coeff is None:
        coeff = LambdaSeries.const(1, order)
    if not isinstance(coeff, LambdaSeries):
        coeff = LambdaSeries.const(coeff, order)
    order = min(order, coeff.order)
    eng = engine(alg, order)
    cur: Terms = {(k, (0,) * alg.dim): c for k, c in enumerate(coeff.coeffs) if c}
    for g in reversed(list(word)):
        cur = eng.lmul_elem(g, cur)
    return UEAElement.from_terms(alg, cur, order)


def _check_vars(alg: LieAlgebra, u: PolySeries):
    if u.variables != tuple(alg.coords):
        raise ValueError(f"expected a series in {alg.coords}, got {u.variables}")


def symmetrize(alg: LieAlgebra, u: PolySeries) -> UEAElement:
    _check_vars(alg, u)
    return UEAElement.from_terms(alg, engine(alg, u.order).symmetrize(u.terms), u.order)


def unsymmetrize(A: UEAElement) -> PolySeries:
    t = engine(A.algebra, A.order).unsymmetrize(A.as_dict())
    return PolySeries(A.algebra.coords, t, A.order)


def gutt_mul(alg: LieAlgebra, u: PolySeries, v: PolySeries, order: int = None) -> PolySeries:
    """u *G v = s^{-1}(s(u) s(v))."""
    _check_vars(alg, u)
    _check_vars(alg, v)
    n = min(u.order, v.order) if order is None else min(order, u.order, v.order)
    eng = engine(alg, n)
    return PolySeries(alg.coords, eng.star(u.truncate(n).terms, v.truncate(n).terms), n)


def gutt_mul_uea(alg: LieAlgebra, u: PolySeries, v: PolySeries) -> PolySeries:
    """The same product computed directly as s^{-1}(s(u) s(v)) in U(g_lam), without monomial caching."""
    return unsymmetrize(symmetrize(alg, u) * symmetrize(alg, v))


def gutt_comm(alg: LieAlgebra, u: PolySeries, v: PolySeries, order: int = None) -> PolySeries:
    return gutt_mul(alg, u, v, order) - gutt_mul(alg, v, u, order)


def gutt_power(alg: LieAlgebra, u: PolySeries, k: int) -> PolySeries:
    r = PolySeries.const(alg.coords, 1, u.order)
    for _ in range(k):
        r = gutt_mul(alg, r, u)
    return r


def exp_gutt(xi: GVector, order: int = None) -> PolySeries:
    """e^xi as a series on g*, for xi with vanishing lam^0 part (commutative exponential)."""
    if not xi.lambda0_is_zero():
        raise ValueError("exp_gutt needs xi with zero lam^0 part")
    if order is not None:
        xi = xi.truncate(order)
    return exp_nilpotent(xi.as_series())


def exp_star(alg: LieAlgebra, f: PolySeries) -> PolySeries:
    """sum_k f^{*k}/k! computed with Gutt powers (independent of exp_gutt)."""
    if f.coeff(0).terms:
        raise ValueError("star exponential needs zero lam^0 part")
    out = PolySeries.const(alg.coords, 1, f.order)
    term = out
    for k in range(1, f.order + 1):
        term = gutt_mul(alg, term, f) * Fraction(1, k)
        out = out + term
    return out


def exp_group_law(xi: GVector, eta: GVector, order: int = None):
    """Both sides of e^xi *G e^eta = e^{CH_lam(xi, eta)}."""
    if order is None:
        order = min(xi.order, eta.order)
    alg = xi.algebra
    lhs = gutt_mul(alg, exp_gutt(xi, order), exp_gutt(eta, order), order)
    rhs = exp_gutt(ch_lambda(xi, eta, order), order)
    return lhs, rhs


def strong_invariance_residual(alg: LieAlgebra, xi: PolySeries, u: PolySeries, kappa=KAPPA) -> PolySeries:
    """gutt_comm(xi, u) - kappa lam Pi(xi, u); zero for linear xi."""
    lam = PolySeries.lam(alg.coords, u.order)
    return gutt_comm(alg, xi, u) - lam * kirillov_poisson(xi, u, alg) * kappa


@dataclass(frozen=True)
class Realization:
    """A homomorphism handle: images of the basis and the target product."""

    images: Tuple[PolySeries, ...]
    mul: Callable[[PolySeries, PolySeries], PolySeries]


def identity_realization(alg: LieAlgebra, order: int) -> Realization:
    imgs = tuple(PolySeries.var(alg.coords, c, order) for c in alg.coords)
    return Realization(imgs, lambda a, b: gutt_mul(alg, a, b))


def generator_extract(phi: Realization, J: Exps, d: int) -> PolySeries:
    """d^J_alpha exp_*(Phi(alpha . X)) at alpha = 0, with plain partials.

    The alpha-exponential is expanded to total alpha-degree d as a dict
    alpha-exponent -> series; the derivative at 0 is J! times the alpha^J
    coefficient.
    """
    if d < sum(J):
        raise ValueError("alpha degree d must be at least |J|")
    n = len(phi.images)
    if len(J) != n:
        raise ValueError("multi-index length must equal the number of generators")
    one = phi.images[0] ** 0
    zero = (0,) * n
    power: Dict[Exps, PolySeries] = {zero: one}
    total: Dict[Exps, PolySeries] = {zero: one}
    for k in range(1, d + 1):
        nxt: Dict[Exps, PolySeries] = {}
        for e, val in power.items():
            for l in range(n):
                e2 = e[:l] + (e[l] + 1,) + e[l + 1:]
                t = phi.mul(val, phi.images[l])
                nxt[e2] = nxt[e2] + t if e2 in nxt else t
        power = nxt
        for e, val in power.items():
            total[e] = val * Fraction(1, factorial(k))
    coef = total.get(tuple(J))
    if coef is None:
        return one * 0
    return coef * multi_factorial(J)
