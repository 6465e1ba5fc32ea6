"""Finite-dimensional Lie algebras by structure constants.

The bracket of g_lam is lam times the bracket of g, so a nested bracket of
depth d carries lam^d.  That is what makes the Campbell-Hausdorff series a
finite computation at any truncation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Optional, Sequence, Tuple

from .series import DEFAULT_ORDER, LambdaSeries, Poly, PolySeries

# table[i][j] = ((k, c_ij^k), ...) with nonzero c only
Table = Tuple[Tuple[Tuple[Tuple[int, Fraction], ...], ...], ...]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    name: str
    basis: Tuple[str, ...]
    table: Table
    coords: Tuple[str, ...] = None

    def __post_init__(self):
        if self.coords is None:
            object.__setattr__(self, "coords", tuple(self.basis))
        if len(self.coords) != len(self.basis):
            raise ConfigError("need one coordinate name per basis element")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def c(self, i: int, j: int, k: int) -> Fraction:
        for kk, v in self.table[i][j]:
            if kk == k:
                return v
        return Fraction(0)

    def bracket_basis(self, i: int, j: int):
        return self.table[i][j]

    @classmethod
    def from_brackets(cls, name, basis, brackets, coords=None, complete=True):
        """Build from entries ``(A, B, C, coeff)`` meaning [A, B] has coeff on C.

        Unlisted brackets are zero.  With ``complete=True`` the entry for
        [B, A] is filled in as the negative unless it was listed explicitly.
        """
        basis = tuple(basis)
        idx = {b: i for i, b in enumerate(basis)}
        n = len(basis)
        explicit: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
        for entry in brackets:
            try:
                a, b, cname, coef = entry
                key = (idx[a], idx[b])
                k = idx[cname]
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"bad bracket entry {entry!r}") from exc
            explicit.setdefault(key, {})
            explicit[key][k] = explicit[key].get(k, 0) + Fraction(coef)
        full = {key: dict(v) for key, v in explicit.items()}
        if complete:
            for (i, j), v in explicit.items():
                if (j, i) not in explicit:
                    full[(j, i)] = {k: -c for k, c in v.items()}
        table = tuple(
            tuple(tuple(sorted((k, c) for k, c in full.get((i, j), {}).items() if c)) for j in range(n))
            for i in range(n))
        return cls(name, basis, table, tuple(coords) if coords else None)

    @classmethod
    def from_config(cls, cfg: dict) -> "LieAlgebra":
        try:
            basis = cfg["basis"]
            dim = cfg.get("dim", len(basis))
            if dim != len(basis):
                raise ConfigError("dim does not match the basis length")
            return cls.from_brackets(cfg.get("name", "algebra"), basis, cfg.get("brackets", []),
                                     cfg.get("coords"))
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}") from exc

    def to_config(self) -> dict:
        br = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k, c in self.table[i][j]:
                    br.append([self.basis[i], self.basis[j], self.basis[k],
                               int(c) if c.denominator == 1 else str(c)])
        return {"name": self.name, "dim": self.dim, "basis": list(self.basis),
                "coords": list(self.coords), "brackets": br}


def load_algebra(ref: str) -> LieAlgebra:
    """Load a preset by name or a JSON config file by path."""
    if ref in PRESETS:
        return PRESETS[ref]()
    with open(ref) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{ref}: {exc}") from exc
    return LieAlgebra.from_config(cfg)


def so3() -> LieAlgebra:
    return LieAlgebra.from_brackets(
        "so3", ("X1", "X2", "X3"),
        [("X1", "X2", "X3", 1), ("X2", "X3", "X1", 1), ("X3", "X1", "X2", 1)],
        coords=("x", "y", "z"))


def h3() -> LieAlgebra:
    return LieAlgebra.from_brackets("h3", ("P", "Q", "Z"), [("P", "Q", "Z", 1)])


def sl2() -> LieAlgebra:
    # [H, E] = 2E, [H, F] = -2F, [E, F] = H
    return LieAlgebra.from_brackets(
        "sl2", ("H", "E", "F"),
        [("H", "E", "E", 2), ("H", "F", "F", -2), ("E", "F", "H", 1)],
        coords=("h", "e", "f"))


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra.from_brackets(f"abelian{n}", tuple(f"A{i + 1}" for i in range(n)), [],
                                    coords=tuple(f"a{i + 1}" for i in range(n)))


PRESETS = {"so3": so3, "h3": h3, "sl2": sl2,
           "abelian1": lambda: abelian(1), "abelian2": lambda: abelian(2), "abelian3": lambda: abelian(3)}


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: Tuple[int, ...]
    value: Fraction

    def describe(self, alg: LieAlgebra) -> str:
        names = ",".join(alg.basis[i] for i in self.indices)
        return f"{self.kind} violated at ({names}): residual {self.value}"


def validate(alg: LieAlgebra) -> Optional[Violation]:
    """Return the first failed antisymmetry or Jacobi identity, or None."""
    n = alg.dim
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = alg.c(i, j, k) + alg.c(j, i, k)
                if s:
                    return Violation("antisymmetry", (i, j, k), s)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = sum((alg.c(i, j, m) * alg.c(m, k, l) + alg.c(j, k, m) * alg.c(m, i, l)
                             + alg.c(k, i, m) * alg.c(m, j, l) for m in range(n)), Fraction(0))
                    if s:
                        return Violation("jacobi", (i, j, k, l), s)
    return None


@dataclass(frozen=True)
class GVector:
    """xi = sum_l xi^l X_l with truncated lam-series coordinates."""

    algebra: LieAlgebra
    coords: Tuple[LambdaSeries, ...]

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate count must equal the algebra dimension")
        if len({c.order for c in self.coords}) > 1:
            raise ValueError("coordinates must share one truncation order")

    @property
    def order(self) -> int:
        return self.coords[0].order

    @classmethod
    def zero(cls, alg, order=DEFAULT_ORDER):
        return cls(alg, tuple(LambdaSeries.const(0, order) for _ in range(alg.dim)))

    @classmethod
    def basis_vector(cls, alg, i, order=DEFAULT_ORDER, scale=None):
        scale = scale if scale is not None else LambdaSeries.const(1, order)
        return cls(alg, tuple(scale if l == i else LambdaSeries.const(0, order) for l in range(alg.dim)))

    @classmethod
    def from_linear(cls, alg, s: PolySeries) -> "GVector":
        """Read coordinates from a series that is linear in the basis (or coordinate) names."""
        n = alg.dim
        coords = [[Fraction(0)] * (s.order + 1) for _ in range(n)]
        for (k, e), c in s.terms.items():
            if sum(e) != 1:
                raise ValueError("expression is not a linear combination of basis elements")
            coords[e.index(1)][k] += c
        return cls(alg, tuple(LambdaSeries(cs, s.order) for cs in coords))

    def check(self, other: "GVector"):
        if self.algebra != other.algebra:
            raise ValueError("algebra mismatch")

    def __add__(self, other):
        self.check(other)
        return GVector(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self.check(other)
        return GVector(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GVector(self.algebra, tuple(-a for a in self.coords))

    def scale(self, s) -> "GVector":
        return GVector(self.algebra, tuple(a * s for a in self.coords))

    def truncate(self, order) -> "GVector":
        return GVector(self.algebra, tuple(a.truncate(order) for a in self.coords))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coords)

    def lambda0_is_zero(self) -> bool:
        return all(a.coeffs[0] == 0 for a in self.coords)

    def __eq__(self, other):
        if not isinstance(other, GVector):
            return NotImplemented
        return self.algebra == other.algebra and all(a == b for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash((self.algebra, self.coords))

    def as_series(self, variables=None) -> PolySeries:
        """The linear function sum_l xi^l mu_l on g*."""
        variables = tuple(variables or self.algebra.coords)
        out = PolySeries.zero(variables, self.order)
        for l, a in enumerate(self.coords):
            out = out + PolySeries.var(variables, variables[l], self.order) * a
        return out

    def __str__(self):
        return str(self.as_series(self.algebra.basis))


def bracket_lambda(xi: GVector, eta: GVector) -> GVector:
    """[xi, eta]_lam = lam [xi, eta]."""
    xi.check(eta)
    alg = xi.algebra
    n = alg.dim
    order = min(xi.order, eta.order)
    out = [LambdaSeries.const(0, order) for _ in range(n)]
    for i in range(n):
        if xi.coords[i].is_zero():
            continue
        for j in range(n):
            entries = alg.table[i][j]
            if not entries or eta.coords[j].is_zero():
                continue
            prod = xi.coords[i] * eta.coords[j]
            for k, c in entries:
                out[k] = out[k] + prod * c
    return GVector(alg, tuple(o.shift(1) for o in out))


def kirillov_poisson(u, v, alg: LieAlgebra):
    """Pi(u, v) = sum c_ij^k mu_k (d_i u)(d_j v) for Poly or PolySeries in alg.coords."""
    if u.variables != tuple(alg.coords) or v.variables != tuple(alg.coords):
        raise ValueError(f"expected polynomials in {alg.coords}")
    n = alg.dim
    make_var = (lambda name: PolySeries.var(alg.coords, name, u.order)) if isinstance(u, PolySeries) \
        else (lambda name: Poly.var(alg.coords, name))
    du = [u.diff(i) for i in range(n)]
    dv = [v.diff(j) for j in range(n)]
    out = u * 0
    for i in range(n):
        if du[i].is_zero():
            continue
        for j in range(n):
            if not alg.table[i][j] or dv[j].is_zero():
                continue
            lin = None
            for k, c in alg.table[i][j]:
                t = make_var(alg.coords[k]) * c
                lin = t if lin is None else lin + t
            out = out + du[i] * dv[j] * lin
    return out


@lru_cache(maxsize=None)
def free_bch(max_len: int) -> Dict[Tuple[int, ...], Fraction]:
    """log(e^A e^B) in the free associative algebra on {A=0, B=1}, words of length <= max_len."""

    def mul(x, y):
        out = {}
        for w1, c1 in x.items():
            for w2, c2 in y.items():
                if len(w1) + len(w2) > max_len:
                    continue
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return {w: c for w, c in out.items() if c}

    X = {}
    for i in range(max_len + 1):
        for j in range(max_len + 1 - i):
            if i + j:
                X[(0,) * i + (1,) * j] = Fraction(1, factorial(i) * factorial(j))
    log = {}
    power = {(): Fraction(1)}
    for k in range(1, max_len + 1):
        power = mul(power, X)
        sign = 1 if k % 2 else -1
        for w, c in power.items():
            log[w] = log.get(w, 0) + sign * c / k
    return {w: c for w, c in log.items() if c}


def ch_lambda(xi: GVector, eta: GVector, order: int = None) -> GVector:
    """Campbell-Hausdorff series of g_lam truncated at lam^order.

    The free-algebra logarithm is turned into brackets with the
    Dynkin-Specht-Wever map: a homogeneous Lie polynomial P of degree m equals
    (1/m) times the right-nested bracketing of its words.
    """
    xi.check(eta)
    if order is None:
        order = min(xi.order, eta.order)
    xi, eta = xi.truncate(order), eta.truncate(order)
    letters = (xi, eta)
    memo: Dict[Tuple[int, ...], GVector] = {}

    def nested(w):
        if w in memo:
            return memo[w]
        if len(w) == 1:
            r = letters[w[0]]
        else:
            r = bracket_lambda(letters[w[0]], nested(w[1:]))
        memo[w] = r
        return r

    out = GVector.zero(xi.algebra, order)
    for w, c in sorted(free_bch(order + 1).items(), key=lambda t: (len(t[0]), t[0])):
        v = nested(w)
        if v.is_zero():
            continue
        out = out + v.scale(c / len(w))
    return out
