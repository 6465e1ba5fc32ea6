"""Exact polynomials and truncated power series in the formal parameter lam.

Three value types live here:

* ``Poly``        -- multivariate polynomial over the rationals.
* ``LambdaSeries`` -- truncated series c_0 + c_1 lam + ... + c_N lam^N whose
  coefficients are rationals (or ``Poly``).
* ``PolySeries``  -- a series with polynomial coefficients, stored flat as
  ``{(k, exponents): Fraction}``.  This is the workhorse type of the package.

All values are immutable after construction.  Arithmetic between series
truncates at the smaller of the two orders.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

Exps = Tuple[int, ...]
Scalar = Union[int, Fraction]

#: degree of the zero polynomial
NEG_INF = -math.inf

DEFAULT_ORDER = 6
LAM = "lam"


class VariableMismatch(ValueError):
    pass


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def _add_exps(a: Exps, b: Exps) -> Exps:
    return tuple(i + j for i, j in zip(a, b))


def grlex_key(e: Exps):
    """Sort key placing terms in canonical print order.

    Degrees ascend; inside one degree the lexicographically larger monomial
    (in declared variable order) comes first.
    """
    return (sum(e), tuple(-i for i in e))


def multi_factorial(e: Exps) -> int:
    r = 1
    for i in e:
        r *= math.factorial(i)
    return r


def monomials_up_to(nvars: int, degree: int):
    """All exponent tuples in ``nvars`` variables of total degree <= degree."""
    out = []

    def rec(prefix, left, remaining):
        if remaining == 1:
            for d in range(left + 1):
                out.append(prefix + (d,))
            return
        for d in range(left + 1):
            rec(prefix + (d,), left - d, remaining - 1)

    if nvars == 0:
        return [()]
    rec((), degree, nvars)
    return sorted(out, key=grlex_key)


def _fmt_coeff_mono(c: Fraction, mono: str) -> Tuple[str, str]:
    """Split a term into (sign, body) for printing."""
    sign = "-" if c < 0 else "+"
    a = -c if c < 0 else c
    if not mono:
        return sign, str(a)
    if a == 1:
        return sign, mono
    return sign, f"{a}*{mono}"


def _join_terms(parts: Sequence[Tuple[str, str]]) -> str:
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _mono_str(variables: Sequence[str], e: Exps) -> str:
    bits = []
    for v, d in zip(variables, e):
        if d == 1:
            bits.append(v)
        elif d > 1:
            bits.append(f"{v}^{d}")
    return "*".join(bits)


class Poly:
    """Polynomial in a fixed, ordered tuple of variables with rational coefficients."""

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exps, Scalar] = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for e, c in (terms or {}).items():
            if len(e) != n:
                raise VariableMismatch(f"exponent {e} does not fit variables {self.variables}")
            if c:
                clean[tuple(e)] = _frac(c)
        self.terms: Dict[Exps, Fraction] = clean
        self._hash = None

    @classmethod
    def const(cls, variables, c) -> "Poly":
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def var(cls, variables, name: str) -> "Poly":
        variables = tuple(variables)
        i = variables.index(name)
        e = [0] * len(variables)
        e[i] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def monomial(cls, variables, e: Exps, c=1) -> "Poly":
        return cls(variables, {tuple(e): c})

    def _check(self, other: "Poly"):
        if self.variables != other.variables:
            raise VariableMismatch(f"{self.variables} vs {other.variables}")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.variables, other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(self.variables, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(self.variables, {e: c * v for e, v in self.terms.items()})
        self._check(other)
        t: Dict[Exps, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exps(e1, e2)
                t[e] = t.get(e, 0) + c1 * c2
        return Poly(self.variables, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = Poly.const(self.variables, 1)
        for _ in range(k):
            r = r * self
        return r

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.variables, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    @property
    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def diff(self, var: Union[str, int], times: int = 1) -> "Poly":
        i = self.variables.index(var) if isinstance(var, str) else var
        t = {}
        for e, c in self.terms.items():
            if e[i] >= times:
                f = math.perm(e[i], times)
                e2 = e[:i] + (e[i] - times,) + e[i + 1:]
                t[e2] = c * f
        return Poly(self.variables, t)

    def D_multi(self, I: Exps) -> "Poly":
        """Multi-index derivative d^I with plain partials (no factors of -i)."""
        if len(I) != len(self.variables):
            raise VariableMismatch(f"multi-index {I} vs {self.variables}")
        t = {}
        for e, c in self.terms.items():
            if all(a >= b for a, b in zip(e, I)):
                f = 1
                for a, b in zip(e, I):
                    f *= math.perm(a, b)
                t[tuple(a - b for a, b in zip(e, I))] = c * f
        return Poly(self.variables, t)

    def rename(self, variables: Sequence[str]) -> "Poly":
        """Embed into a larger variable universe (every old name must be present)."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * len(variables)
            for i, d in zip(idx, e):
                e2[i] = d
            t[tuple(e2)] = c
        return Poly(variables, t)

    def subs(self, values: Sequence):
        """Substitute ring elements (Poly, PolySeries or scalars) for every variable.

        ``values`` has one entry per variable.  Powers are cached per
        variable, so this is plain Horner-free expansion.
        """
        if len(values) != len(self.variables):
            raise VariableMismatch("arity mismatch in substitution")
        one = _one_like(values)
        powcache = [dict() for _ in values]

        def pw(i, d):
            c = powcache[i]
            if d not in c:
                c[d] = one if d == 0 else pw(i, d - 1) * values[i]
            return c[d]

        acc = None
        for e, c in sorted(self.terms.items(), key=lambda t: grlex_key(t[0])):
            term = one * c
            for i, d in enumerate(e):
                if d:
                    term = term * pw(i, d)
            acc = term if acc is None else acc + term
        return acc if acc is not None else one * 0

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    def __str__(self):
        parts = [_fmt_coeff_mono(c, _mono_str(self.variables, e)) for e, c in self.sorted_terms()]
        return _join_terms(parts)

    def __repr__(self):
        return f"Poly({self.variables!r}, {str(self)!r})"


def _one_like(values):
    for v in values:
        if isinstance(v, PolySeries):
            return PolySeries.const(v.variables, 1, v.order)
        if isinstance(v, LambdaSeries):
            return LambdaSeries.const(1, v.order)
    for v in values:
        if isinstance(v, Poly):
            return Poly.const(v.variables, 1)
    return Fraction(1)


class LambdaSeries:
    """Truncated series sum_k c_k lam^k, k = 0..order (inclusive)."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable, order: int = None):
        coeffs = list(coeffs)
        if order is None:
            order = max(len(coeffs) - 1, 0)
        zero = _zero_of(coeffs)
        coeffs = coeffs[: order + 1] + [zero] * (order + 1 - len(coeffs))
        self.coeffs = tuple(c if isinstance(c, Poly) else _frac(c) for c in coeffs)
        self.order = order

    @classmethod
    def const(cls, c, order: int = DEFAULT_ORDER) -> "LambdaSeries":
        return cls([c], order)

    @classmethod
    def lam(cls, order: int = DEFAULT_ORDER) -> "LambdaSeries":
        return cls([0, 1], order)

    def _lift(self, other) -> "LambdaSeries":
        if isinstance(other, LambdaSeries):
            return other
        return LambdaSeries.const(other, self.order)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        other = self._lift(other)
        n = min(self.order, other.order)
        return LambdaSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return LambdaSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, LambdaSeries):
            return LambdaSeries([c * other for c in self.coeffs], self.order)
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = self.coeffs[0] * other.coeffs[k]
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * other.coeffs[k - i]
            out.append(acc)
        return LambdaSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = LambdaSeries.const(1, self.order)
        for _ in range(k):
            r = r * self
        return r

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LambdaSeries.const(other, self.order)
        if not isinstance(other, LambdaSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def truncate(self, order: int) -> "LambdaSeries":
        return LambdaSeries(self.coeffs[: order + 1], min(order, self.order))

    def shift(self, j: int) -> "LambdaSeries":
        """Multiply by lam^j."""
        z = _zero_of(self.coeffs)
        return LambdaSeries([z] * j + list(self.coeffs), self.order)

    def divide_lambda(self) -> "LambdaSeries":
        if self.coeffs[0] != 0:
            raise ArithmeticError("series is not divisible by lam")
        return LambdaSeries(self.coeffs[1:], self.order - 1)

    def inverse(self) -> "LambdaSeries":
        """Multiplicative inverse; needs an invertible rational constant term."""
        c0 = self.coeffs[0]
        if isinstance(c0, Poly) or c0 == 0:
            raise ArithmeticError("constant term is not a unit")
        inv = [1 / c0]
        for k in range(1, self.order + 1):
            s = sum((self.coeffs[i] * inv[k - i] for i in range(1, k + 1)), Fraction(0))
            inv.append(-s / c0)
        return LambdaSeries(inv, self.order)

    def exp_nilpotent(self) -> "LambdaSeries":
        return exp_nilpotent(self)

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if isinstance(c, Poly):
                for e, v in c.sorted_terms():
                    parts.append(_fmt_coeff_mono(v, _lam_mono(k, _mono_str(c.variables, e))))
            elif c:
                parts.append(_fmt_coeff_mono(c, _lam_mono(k, "")))
        return _join_terms(parts)

    def __repr__(self):
        return f"LambdaSeries({str(self)!r}, order={self.order})"


def _zero_of(coeffs):
    for c in coeffs:
        if isinstance(c, Poly):
            return Poly(c.variables)
    return Fraction(0)


def _lam_mono(k: int, mono: str) -> str:
    if k == 0:
        return mono
    lam = LAM if k == 1 else f"{LAM}^{k}"
    return f"{lam}*{mono}" if mono else lam


def exp_nilpotent(a):
    """exp(a) for a series with vanishing lam^0 coefficient (finite sum at truncation)."""
    if isinstance(a, PolySeries):
        if a.coeff(0).terms:
            raise ValueError("exp of a series with nonzero lam^0 part is not representable")
        one = PolySeries.const(a.variables, 1, a.order)
    else:
        if a.coeffs[0] != 0:
            raise ValueError("exp of a series with nonzero lam^0 part is not representable")
        one = LambdaSeries.const(1, a.order)
    result = one
    term = one
    for k in range(1, a.order + 1):
        term = term * a * Fraction(1, k)
        result = result + term
    return result


class PolySeries:
    """Series in lam with polynomial coefficients, stored as {(k, exps): Fraction}."""

    __slots__ = ("variables", "terms", "order", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Tuple[int, Exps], Scalar] = None,
                 order: int = DEFAULT_ORDER):
        self.variables = tuple(variables)
        self.order = order
        n = len(self.variables)
        clean = {}
        for (k, e), c in (terms or {}).items():
            if k > order or not c:
                continue
            if len(e) != n:
                raise VariableMismatch(f"exponent {e} does not fit variables {self.variables}")
            clean[(k, tuple(e))] = _frac(c)
        self.terms: Dict[Tuple[int, Exps], Fraction] = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables, terms, order):
        # trusted constructor: terms already clean
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.order = order
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, variables, order=DEFAULT_ORDER):
        return cls(variables, {}, order)

    @classmethod
    def const(cls, variables, c, order=DEFAULT_ORDER):
        if isinstance(c, LambdaSeries):
            n = len(tuple(variables))
            return cls(variables, {(k, (0,) * n): v for k, v in enumerate(c.coeffs)}, min(order, c.order))
        return cls(variables, {(0, (0,) * len(tuple(variables))): c}, order)

    @classmethod
    def var(cls, variables, name, order=DEFAULT_ORDER):
        return cls.from_poly(Poly.var(variables, name), order)

    @classmethod
    def lam(cls, variables, order=DEFAULT_ORDER):
        return cls(variables, {(1, (0,) * len(tuple(variables))): 1}, order)

    @classmethod
    def from_poly(cls, p: Poly, order=DEFAULT_ORDER, k: int = 0):
        return cls(p.variables, {(k, e): c for e, c in p.terms.items()}, order)

    @classmethod
    def from_polys(cls, polys: Sequence[Poly], order=None):
        polys = list(polys)
        if order is None:
            order = len(polys) - 1
        variables = polys[0].variables
        terms = {}
        for k, p in enumerate(polys):
            if p.variables != variables:
                raise VariableMismatch("coefficients must share one variable list")
            for e, c in p.terms.items():
                terms[(k, e)] = c
        return cls(variables, terms, order)

    @classmethod
    def from_lambda_series(cls, s: LambdaSeries, variables=()):
        """Embed a lam-series with rational or polynomial coefficients."""
        if s.coeffs and isinstance(s.coeffs[0], Poly):
            return cls.from_polys(list(s.coeffs), s.order)
        z = (0,) * len(variables)
        return cls(variables, {(k, z): c for k, c in enumerate(s.coeffs)}, s.order)

    def as_lambda_series(self) -> LambdaSeries:
        return LambdaSeries([self.coeff(k) for k in range(self.order + 1)], self.order)

    def coeff(self, k: int) -> Poly:
        return Poly(self.variables, {e: c for (j, e), c in self.terms.items() if j == k})

    def _check(self, other: "PolySeries"):
        if self.variables != other.variables:
            raise VariableMismatch(f"{self.variables} vs {other.variables}")

    def _lift(self, other) -> "PolySeries":
        if isinstance(other, PolySeries):
            self._check(other)
            return other
        if isinstance(other, Poly):
            self._check_poly(other)
            return PolySeries.from_poly(other, self.order)
        return PolySeries.const(self.variables, other, self.order)

    def _check_poly(self, p: Poly):
        if p.variables != self.variables:
            raise VariableMismatch(f"{self.variables} vs {p.variables}")

    def __add__(self, other):
        other = self._lift(other)
        n = min(self.order, other.order)
        t = {key: c for key, c in self.terms.items() if key[0] <= n}
        for key, c in other.terms.items():
            if key[0] > n:
                continue
            v = t.get(key, 0) + c
            if v:
                t[key] = v
            else:
                t.pop(key, None)
        return PolySeries._raw(self.variables, t, n)

    __radd__ = __add__

    def __neg__(self):
        return PolySeries._raw(self.variables, {k: -c for k, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, LambdaSeries):
            other = PolySeries.const(self.variables, other, self.order)
        if not isinstance(other, (PolySeries, Poly)):
            c = _frac(other)
            if not c:
                return PolySeries._raw(self.variables, {}, self.order)
            return PolySeries._raw(self.variables, {k: c * v for k, v in self.terms.items()}, self.order)
        other = self._lift(other)
        n = min(self.order, other.order)
        t: Dict[Tuple[int, Exps], Fraction] = {}
        for (k1, e1), c1 in self.terms.items():
            if k1 > n:
                continue
            for (k2, e2), c2 in other.terms.items():
                k = k1 + k2
                if k > n:
                    continue
                key = (k, _add_exps(e1, e2))
                t[key] = t.get(key, 0) + c1 * c2
        return PolySeries(self.variables, t, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = PolySeries.const(self.variables, 1, self.order)
        for _ in range(k):
            r = r * self
        return r

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Poly, LambdaSeries)):
            other = self._lift(other) if not isinstance(other, LambdaSeries) else \
                PolySeries.const(self.variables, other, self.order)
        if not isinstance(other, PolySeries):
            return NotImplemented
        if self.variables != other.variables:
            return False
        n = min(self.order, other.order)
        return self.truncate(n).terms == other.truncate(n).terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for (_, e) in self.terms)

    def constant_series(self) -> LambdaSeries:
        z = (0,) * len(self.variables)
        return LambdaSeries([self.terms.get((k, z), 0) for k in range(self.order + 1)], self.order)

    def truncate(self, order: int) -> "PolySeries":
        order = min(order, self.order)
        return PolySeries._raw(self.variables, {k: c for k, c in self.terms.items() if k[0] <= order}, order)

    def with_order(self, order: int) -> "PolySeries":
        """Reinterpret at another truncation order (drops terms above it)."""
        return PolySeries._raw(self.variables, {k: c for k, c in self.terms.items() if k[0] <= order}, order)

    def shift(self, j: int) -> "PolySeries":
        """Multiply by lam^j."""
        return PolySeries._raw(self.variables, {(k + j, e): c for (k, e), c in self.terms.items()
                                                if k + j <= self.order}, self.order)

    def divide_lambda(self) -> "PolySeries":
        """Exact division by lam; the result loses one order of precision."""
        if any(k == 0 for (k, _) in self.terms):
            raise ArithmeticError("series is not divisible by lam")
        return PolySeries._raw(self.variables, {(k - 1, e): c for (k, e), c in self.terms.items()},
                               self.order - 1)

    @property
    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for (_, e) in self.terms)

    def lambda_valuation(self) -> int:
        return min((k for (k, _) in self.terms), default=self.order + 1)

    def diff(self, var, times: int = 1) -> "PolySeries":
        i = self.variables.index(var) if isinstance(var, str) else var
        t = {}
        for (k, e), c in self.terms.items():
            if e[i] >= times:
                t[(k, e[:i] + (e[i] - times,) + e[i + 1:])] = c * math.perm(e[i], times)
        return PolySeries._raw(self.variables, t, self.order)

    def D_multi(self, I: Exps) -> "PolySeries":
        return PolySeries.from_lambda_series(
            LambdaSeries([self.coeff(k).D_multi(I) for k in range(self.order + 1)], self.order))

    def rename(self, variables) -> "PolySeries":
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        t = {}
        for (k, e), c in self.terms.items():
            e2 = [0] * len(variables)
            for i, d in zip(idx, e):
                e2[i] = d
            t[(k, tuple(e2))] = c
        return PolySeries._raw(variables, t, self.order)

    def restrict(self, variables) -> "PolySeries":
        """Drop variables that do not occur (inverse of ``rename``)."""
        variables = tuple(variables)
        idx = [self.variables.index(v) for v in variables]
        keep = set(idx)
        t = {}
        for (k, e), c in self.terms.items():
            if any(d for i, d in enumerate(e) if i not in keep):
                raise VariableMismatch("series depends on a dropped variable")
            t[(k, tuple(e[i] for i in idx))] = c
        return PolySeries._raw(variables, t, self.order)

    def subs(self, values: Sequence["PolySeries"]) -> "PolySeries":
        """Substitute a PolySeries for every variable (composition u(v))."""
        if len(values) != len(self.variables):
            raise VariableMismatch("arity mismatch in substitution")
        target = values[0]
        out = PolySeries.zero(target.variables, min(self.order, min(v.order for v in values)))
        lam = PolySeries.lam(target.variables, out.order)
        for k in range(self.order + 1):
            p = self.coeff(k)
            if p.terms:
                out = out + (lam ** k) * p.subs(values)
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (t[0][0], grlex_key(t[0][1])))

    def __str__(self):
        parts = [_fmt_coeff_mono(c, _lam_mono(k, _mono_str(self.variables, e)))
                 for (k, e), c in self.sorted_terms()]
        return _join_terms(parts)

    def __repr__(self):
        return f"PolySeries({self.variables!r}, {str(self)!r}, order={self.order})"

    def machine(self) -> dict:
        """Structured form: one coefficient list per lam order, canonical term order."""
        orders = []
        for k in range(self.order + 1):
            p = self.coeff(k)
            orders.append([[list(e), str(c)] for e, c in p.sorted_terms()])
        return {"variables": list(self.variables), "order": self.order, "coefficients": orders}


def formal_shift(u: Poly, p: Mapping[str, PolySeries], order: int = DEFAULT_ORDER,
                 base_vars: Sequence[str] = None) -> PolySeries:
    """Apply exp(p . d/dy) to the polynomial u(y).

    ``p`` maps each variable of ``u`` to a series in the base variables x with
    zero lam^0 part.  The result lives in variables (x..., y...) and is the sum
    over multi-indices J of p^J (d^J u) / J!, which terminates because p^J is
    O(lam^|J|).
    """
    yvars = u.variables
    if base_vars is None:
        some = next(iter(p.values()), None)
        base_vars = some.variables if some is not None else ()
    base_vars = tuple(base_vars)
    allvars = base_vars + tuple(v for v in yvars if v not in base_vars)
    shifts = []
    for v in yvars:
        s = p.get(v)
        if s is None:
            shifts.append(PolySeries.zero(allvars, order))
            continue
        if s.coeff(0).terms:
            raise ValueError(f"shift for {v} has a nonzero lam^0 part")
        shifts.append(s.rename(allvars).with_order(min(order, s.order)))
    out_order = min([order] + [s.order for s in shifts])
    result = PolySeries.zero(allvars, out_order)
    ulift = u.rename(allvars)
    maxd = u.degree if u.terms else 0
    n = len(yvars)
    yidx = [allvars.index(v) for v in yvars]
    for J in monomials_up_to(n, min(int(maxd), out_order)):
        I = [0] * len(allvars)
        for i, d in zip(yidx, J):
            I[i] = d
        du = ulift.D_multi(tuple(I))
        if du.is_zero():
            continue
        term = PolySeries.from_poly(du, out_order) * Fraction(1, multi_factorial(J))
        for s, d in zip(shifts, J):
            if d:
                term = term * (s ** d)
        result = result + term
    return result


def compose(u: Poly, v: Sequence[PolySeries], order: int = DEFAULT_ORDER) -> PolySeries:
    """u(v(x)) computed as exp((v - v0) d) u evaluated at y = v0."""
    if len(v) != len(u.variables):
        raise VariableMismatch(f"u has {len(u.variables)} variables but {len(v)} values were given")
    xvars = v[0].variables
    for w in v:
        if w.variables != xvars:
            raise VariableMismatch("all substituted series must share variables")
    # fresh names for the shifted variables so they cannot collide with x
    ynames = tuple(f"_y{i}" for i in range(len(u.variables)))
    uy = Poly(ynames, u.terms)
    shifts = {}
    base = []
    for name, w in zip(ynames, v):
        w0 = w.coeff(0)
        base.append(PolySeries.from_poly(w0, order))
        shifts[name] = (w - w0).with_order(min(order, w.order))
    shifted = formal_shift(uy, shifts, order, base_vars=xvars)
    # shifted lives in (x..., _y...); set _y = v0(x)
    values = [PolySeries.var(xvars, x, shifted.order) for x in xvars] + [b.with_order(shifted.order) for b in base]
    return shifted.subs(values)
