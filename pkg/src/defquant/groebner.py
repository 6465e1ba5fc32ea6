"""Commutative Groebner bases over the rationals, with cofactor tracking.

Every basis element remembers how it was built from the input generators,
g = sum_i h_i f_i, so a division by the basis can be rewritten as a
combination of the original generators.  That is what the orbit reduction
needs to lift commutative quotients to star-ideal elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

from .series import Poly

Exps = Tuple[int, ...]


def order_key(kind: str, perm: Sequence[int]) -> Callable[[Exps], tuple]:
    """Sort key for a monomial order on exponents, larger key = larger monomial.

    ``perm`` lists variable positions from most to least significant.
    """
    if kind == "lex":
        return lambda e: tuple(e[i] for i in perm)
    if kind == "grlex":
        return lambda e: (sum(e),) + tuple(e[i] for i in perm)
    if kind == "grevlex":
        return lambda e: (sum(e),) + tuple(-e[i] for i in reversed(perm))
    raise ValueError(f"unknown monomial order {kind!r}")


def leading(p: Poly, key) -> Tuple[Exps, Fraction]:
    e = max(p.terms, key=key)
    return e, p.terms[e]


def _divides(a: Exps, b: Exps) -> bool:
    return all(i <= j for i, j in zip(a, b))


def _lcm(a: Exps, b: Exps) -> Exps:
    return tuple(max(i, j) for i, j in zip(a, b))


def _sub(a: Exps, b: Exps) -> Exps:
    return tuple(i - j for i, j in zip(a, b))


@dataclass(frozen=True)
class GroebnerBasis:
    polys: Tuple[Poly, ...]
    cofactors: Tuple[Tuple[Poly, ...], ...]   # cofactors[g][i]: polys[g] = sum_i cofactors[g][i] * gens[i]
    gens: Tuple[Poly, ...]
    kind: str
    perm: Tuple[int, ...]

    @property
    def key(self):
        return order_key(self.kind, self.perm)

    def leading_monomials(self) -> List[Exps]:
        k = self.key
        return [leading(g, k)[0] for g in self.polys]

    def divide(self, f: Poly) -> Tuple[List[Poly], Poly]:
        """Multivariate division: f = sum_g q_g g + r, r reduced."""
        return divide(f, self.polys, self.key)

    def reduce(self, f: Poly) -> Poly:
        return self.divide(f)[1]

    def generator_quotients(self, f: Poly) -> Tuple[List[Poly], Poly]:
        """f = sum_i Q_i gens_i + r with r in normal form."""
        qs, r = self.divide(f)
        V = f.variables
        Q = [Poly(V) for _ in self.gens]
        for q, cof in zip(qs, self.cofactors):
            if q.is_zero():
                continue
            for i, h in enumerate(cof):
                if not h.is_zero():
                    Q[i] = Q[i] + q * h
        return Q, r

    def is_normal(self, e: Exps) -> bool:
        return not any(_divides(l, e) for l in self.leading_monomials())


def divide(f: Poly, G: Sequence[Poly], key) -> Tuple[List[Poly], Poly]:
    V = f.variables
    leads = [leading(g, key) for g in G]
    qs: List[Dict[Exps, Fraction]] = [dict() for _ in G]
    rem: Dict[Exps, Fraction] = {}
    p = dict(f.terms)
    while p:
        e = max(p, key=key)
        c = p[e]
        for gi, (le, lc) in enumerate(leads):
            if _divides(le, e):
                m = _sub(e, le)
                f_ = c / lc
                qs[gi][m] = qs[gi].get(m, 0) + f_
                for ge, gc in G[gi].terms.items():
                    t = tuple(a + b for a, b in zip(ge, m))
                    v = p.get(t, 0) - f_ * gc
                    if v:
                        p[t] = v
                    else:
                        p.pop(t, None)
                break
        else:
            rem[e] = c
            del p[e]
    return [Poly(V, q) for q in qs], Poly(V, rem)


def buchberger(gens: Sequence[Poly], kind: str = "lex", perm: Sequence[int] = None) -> GroebnerBasis:
    """Reduced Groebner basis with cofactors (plain Buchberger with the coprime criterion)."""
    gens = tuple(g for g in gens)
    if not gens:
        raise ValueError("need at least one generator")
    V = gens[0].variables
    n = len(V)
    perm = tuple(range(n)) if perm is None else tuple(perm)
    key = order_key(kind, perm)
    one = Poly.const(V, 1)
    zero = Poly(V)
    polys: List[Poly] = []
    cofs: List[List[Poly]] = []
    for i, g in enumerate(gens):
        if g.is_zero():
            continue
        polys.append(g)
        cofs.append([one if j == i else zero for j in range(len(gens))])

    pairs = [(i, j) for i in range(len(polys)) for j in range(i)]
    while pairs:
        i, j = pairs.pop(0)
        (ei, ci), (ej, cj) = leading(polys[i], key), leading(polys[j], key)
        L = _lcm(ei, ej)
        if L == tuple(a + b for a, b in zip(ei, ej)):
            continue
        mi = Poly.monomial(V, _sub(L, ei), 1 / ci)
        mj = Poly.monomial(V, _sub(L, ej), 1 / cj)
        s = mi * polys[i] - mj * polys[j]
        scof = [mi * a - mj * b for a, b in zip(cofs[i], cofs[j])]
        qs, r = divide(s, polys, key)
        if r.is_zero():
            continue
        rcof = list(scof)
        for q, cof in zip(qs, cofs):
            if q.is_zero():
                continue
            rcof = [a - q * b for a, b in zip(rcof, cof)]
        polys.append(r)
        cofs.append(rcof)
        k = len(polys) - 1
        pairs.extend((k, m) for m in range(k))

    # minimalize: a divisor of a leading monomial never sorts after it
    keep: List[int] = []
    for i in sorted(range(len(polys)), key=lambda i: key(leading(polys[i], key)[0])):
        ei = leading(polys[i], key)[0]
        if not any(_divides(leading(polys[j], key)[0], ei) for j in keep):
            keep.append(i)
    basis = [polys[i] for i in keep]
    bcofs = [cofs[i] for i in keep]
    out_p, out_c = [], []
    for idx, (g, cof) in enumerate(zip(basis, bcofs)):
        others = [b for j, b in enumerate(basis) if j != idx]
        if others:
            qs, r = divide(g, others, key)
            # g = sum q_j b_j + r, so r = g - sum q_j b_j
            ocofs = [c for j, c in enumerate(bcofs) if j != idx]
            rc = list(cof)
            for q, oc in zip(qs, ocofs):
                if not q.is_zero():
                    rc = [a - q * b for a, b in zip(rc, oc)]
        else:
            r, rc = g, list(cof)
        lc = leading(r, key)[1]
        out_p.append(r * (1 / lc))
        out_c.append(tuple(h * (1 / lc) for h in rc))
    order = sorted(range(len(out_p)), key=lambda i: key(leading(out_p[i], key)[0]))
    return GroebnerBasis(tuple(out_p[i] for i in order), tuple(out_c[i] for i in order), gens, kind, perm)
