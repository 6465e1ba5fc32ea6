"""Reference implementations used only by the tests.

They are deliberately naive and share no code with the package beyond the
plain data types: words are rewritten swap by swap, symmetrization sums
over all orderings, the Moyal product is the bidifferential sum taken
literally, and group-law checks go through matrix exponentials.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product
from math import factorial
from typing import Dict, List, Tuple

from defquant.series import LambdaSeries, PolySeries

Word = Tuple[int, ...]
# element of U(g_lam): {(k, word): coeff}, every word sorted when in normal form
UElem = Dict[Tuple[int, Word], Fraction]


def _add(d, key, c):
    v = d.get(key, 0) + c
    if v:
        d[key] = v
    else:
        d.pop(key, None)


def normal_order(alg, elem: UElem, order: int) -> UElem:
    """Rewrite X_j X_i -> X_i X_j + lam [X_j, X_i] at the first descent until all words are sorted."""
    todo = dict(elem)
    done: UElem = {}
    while todo:
        (k, w), c = todo.popitem()
        pos = next((t for t in range(len(w) - 1) if w[t] > w[t + 1]), None)
        if pos is None:
            _add(done, (k, w), c)
            continue
        j, i = w[pos], w[pos + 1]
        swapped = w[:pos] + (i, j) + w[pos + 2:]
        _add(todo, (k, swapped), c)
        if k + 1 <= order:
            for m, cm in alg.table[j][i]:
                _add(todo, (k + 1, w[:pos] + (m,) + w[pos + 2:]), c * cm)
    return done


def word_of(J) -> Word:
    return tuple(i for i, d in enumerate(J) for _ in range(d))


def exps_of(w: Word, n: int):
    e = [0] * n
    for i in w:
        e[i] += 1
    return tuple(e)


def sym_oracle(alg, J, order: int) -> UElem:
    """(1/|J|!) sum over all orderings of the multiset, normal ordered."""
    w = word_of(J)
    d = len(w)
    raw: UElem = {}
    for perm in permutations(w):
        _add(raw, (0, perm), Fraction(1, factorial(d)))
    return normal_order(alg, raw, order)


def u_mul(alg, a: UElem, b: UElem, order: int) -> UElem:
    raw: UElem = {}
    for (k1, w1), c1 in a.items():
        for (k2, w2), c2 in b.items():
            if k1 + k2 <= order:
                _add(raw, (k1 + k2, w1 + w2), c1 * c2)
    return normal_order(alg, raw, order)


def symmetrize_oracle(alg, u: PolySeries) -> UElem:
    out: UElem = {}
    for (k, J), c in u.terms.items():
        for (k2, w), c2 in sym_oracle(alg, J, u.order).items():
            if k + k2 <= u.order:
                _add(out, (k + k2, w), c * c2)
    return out


def unsymmetrize_oracle(alg, A: UElem, order: int) -> PolySeries:
    n = alg.dim
    rest = dict(A)
    out = {}
    while rest:
        top = max(len(w) for (_, w) in rest)
        (k, w), c = next((key, c) for key, c in sorted(rest.items()) if len(key[1]) == top)
        J = exps_of(w, n)
        out[(k, J)] = out.get((k, J), 0) + c
        for (k2, w2), c2 in sym_oracle(alg, J, order).items():
            if k + k2 <= order:
                _add(rest, (k + k2, w2), -c * c2)
    return PolySeries(alg.coords, out, order)


def gutt_oracle(alg, u: PolySeries, v: PolySeries) -> PolySeries:
    N = min(u.order, v.order)
    return unsymmetrize_oracle(alg, u_mul(alg, symmetrize_oracle(alg, u), symmetrize_oracle(alg, v), N), N)


# ---------------------------------------------------------------- Moyal

def moyal_oracle(u: PolySeries, v: PolySeries, winv, order: int) -> PolySeries:
    """sum_k (lam/2)^k / k! w^{i1 j1}...w^{ik jk} d_{i1..ik} u d_{j1..jk} v, index tuples enumerated."""
    d = len(winv)
    V = u.variables
    lam = PolySeries.lam(V, order)
    out = PolySeries.zero(V, order)
    top = min(max((sum(e) for _, e in u.terms), default=0), max((sum(e) for _, e in v.terms), default=0))
    for k in range(min(order, top) + 1):
        acc = PolySeries.zero(V, order)
        for I in product(range(d), repeat=k):
            for J in product(range(d), repeat=k):
                w = Fraction(1)
                for i, j in zip(I, J):
                    w *= winv[i][j]
                if not w:
                    continue
                du, dv = u, v
                for i in I:
                    du = du.diff(i)
                for j in J:
                    dv = dv.diff(j)
                acc = acc + du * dv * w
        out = out + acc * (lam ** k) * Fraction(1, 2 ** k * factorial(k))
    return out


# ---------------------------------------------------------------- matrices over lam-series

def mat_zero(n, order):
    return [[LambdaSeries.const(0, order) for _ in range(n)] for _ in range(n)]


def mat_id(n, order):
    m = mat_zero(n, order)
    for i in range(n):
        m[i][i] = LambdaSeries.const(1, order)
    return m


def mat_mul(a, b):
    n = len(a)
    order = a[0][0].order
    out = mat_zero(n, order)
    for i in range(n):
        for j in range(n):
            acc = LambdaSeries.const(0, order)
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            out[i][j] = acc
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def mat_scale(a, c):
    return [[x * c for x in r] for r in a]


def mat_exp_nilpotent(a, order):
    """exp of a matrix whose entries all vanish at lam^0."""
    n = len(a)
    out = mat_id(n, order)
    term = mat_id(n, order)
    for k in range(1, order + 1):
        term = mat_scale(mat_mul(term, a), Fraction(1, k))
        out = mat_add(out, term)
    return out


def representation(alg, rep_mats, xi, order):
    """lam * rho(xi) as a matrix of lam-series; xi's coordinates are extended to ``order``."""
    n = len(rep_mats[0])
    out = mat_zero(n, order)
    for l, coord in enumerate(xi.coords):
        cs = [Fraction(0)] + list(coord.coeffs)
        s = LambdaSeries(cs[:order + 1] + [0] * max(0, order + 1 - len(cs)), order)
        for i in range(n):
            for j in range(n):
                if rep_mats[l][i][j]:
                    out[i][j] = out[i][j] + s * rep_mats[l][i][j]
    return out


def adjoint_matrices(alg) -> List[List[List[Fraction]]]:
    """(ad X_i)_{kj} = c_{ij}^k."""
    n = alg.dim
    return [[[alg.c(i, j, k) for j in range(n)] for k in range(n)] for i in range(n)]


def heisenberg_matrices():
    """P = E12, Q = E23, Z = E13 in 3x3 strictly upper triangular matrices."""
    def e(i, j):
        m = [[0] * 3 for _ in range(3)]
        m[i][j] = 1
        return m
    return [e(0, 1), e(1, 2), e(0, 2)]
