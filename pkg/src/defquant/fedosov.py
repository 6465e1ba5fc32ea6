"""Fedosov quantization over a flat base R^{2n} with constant symplectic form.

A Weyl element is a PolySeries in the base variables x followed by the fiber
variables y.  A ``WeylForm`` attaches such elements to increasing tuples of
dx indices.  The fiberwise product is the Moyal-Weyl product

    a o b = sum_k (lam/2)^k / k!  w^{i1 j1} ... w^{ik jk} d_y^I a  d_y^J b

with filtration deg(y) = 1, deg(lam) = 2.  The connection is
D = -delta + d - (1/lam)[gamma, .], and for a constant perturbation
Omega = w + lam w_1 + ... the abelian connection has gamma linear in y.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .report import CheckReport
from .series import DEFAULT_ORDER, LambdaSeries, Poly, PolySeries, monomials_up_to

Exps = Tuple[int, ...]
Matrix = Tuple[Tuple[Fraction, ...], ...]
FormIdx = Tuple[int, ...]


class FedosovError(ValueError):
    pass


def _mat(rows) -> Matrix:
    return tuple(tuple(Fraction(c) for c in r) for r in rows)


def mat_inverse(m: Matrix) -> Matrix:
    """Exact Gauss-Jordan inverse over the rationals."""
    n = len(m)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise FedosovError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return tuple(tuple(r[n:]) for r in a)


def series_matrix_inverse(m: Sequence[Sequence[LambdaSeries]]) -> List[List[LambdaSeries]]:
    """Inverse of a matrix of lam-series whose lam^0 part is invertible."""
    n = len(m)
    order = min(c.order for r in m for c in r)
    m0inv = mat_inverse(tuple(tuple(c.coeffs[0] for c in r) for r in m))
    # M = M0 (1 + M0^{-1} E);  inverse = sum_k (-M0^{-1} E)^k M0^{-1}
    zero = LambdaSeries.const(0, order)
    inv0 = [[LambdaSeries.const(m0inv[i][j], order) for j in range(n)] for i in range(n)]
    E = [[m[i][j] - m[i][j].coeffs[0] for j in range(n)] for i in range(n)]

    def mm(A, B):
        return [[sum((A[i][k] * B[k][j] for k in range(n)), zero) for j in range(n)] for i in range(n)]

    step = [[-x for x in r] for r in mm(inv0, E)]
    acc = inv0
    term = inv0
    for _ in range(order):
        term = mm(step, term)
        acc = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(acc, term)]
    return acc


@dataclass(frozen=True)
class SymplecticData:
    omega: Matrix
    omega_inv: Matrix = None

    def __post_init__(self):
        n = len(self.omega)
        if n % 2 or any(len(r) != n for r in self.omega):
            raise FedosovError("omega must be a square matrix of even size")
        for i in range(n):
            for j in range(n):
                if self.omega[i][j] != -self.omega[j][i]:
                    raise FedosovError("omega must be antisymmetric")
        if self.omega_inv is None:
            object.__setattr__(self, "omega_inv", mat_inverse(self.omega))

    @classmethod
    def from_rows(cls, rows):
        return cls(_mat(rows))

    @classmethod
    def standard(cls, n: int = 1):
        """Darboux form with poisson tensor w^{i, i+n} = 1, so [q_i, p_i] = lam."""
        dim = 2 * n
        rows = [[0] * dim for _ in range(dim)]
        for i in range(n):
            rows[i][i + n] = -1
            rows[i + n][i] = 1
        return cls.from_rows(rows)

    @property
    def dim(self) -> int:
        return len(self.omega)


@dataclass(frozen=True)
class FedosovConfig:
    symplectic: SymplecticData
    perturbations: Tuple[Tuple[int, Matrix], ...] = ()
    order: int = DEFAULT_ORDER
    coords: Tuple[str, ...] = None

    def __post_init__(self):
        d = self.symplectic.dim
        if self.coords is None:
            object.__setattr__(self, "coords", tuple(f"x{i + 1}" for i in range(d)))
        if len(self.coords) != d:
            raise FedosovError("need one coordinate name per base dimension")
        for k, m in self.perturbations:
            if k < 1:
                raise FedosovError("perturbation orders start at 1")
            if len(m) != d or any(len(r) != d for r in m):
                raise FedosovError("perturbation must be a constant dim x dim matrix")
            for i in range(d):
                for j in range(d):
                    if m[i][j] != -m[j][i]:
                        raise FedosovError("perturbation 2-form must be antisymmetric")

    @property
    def yvars(self) -> Tuple[str, ...]:
        return tuple(f"y{i + 1}" for i in range(self.symplectic.dim))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self.coords) + self.yvars

    def curvature_matrix(self) -> List[List[LambdaSeries]]:
        """Omega_{ij} as lam-series."""
        d = self.symplectic.dim
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                cs = [Fraction(0)] * (self.order + 1)
                cs[0] = self.symplectic.omega[i][j]
                for k, m in self.perturbations:
                    if k <= self.order:
                        cs[k] += m[i][j]
                row.append(LambdaSeries(cs, self.order))
            out.append(row)
        return out

    @classmethod
    def from_dict(cls, cfg: dict) -> "FedosovConfig":
        try:
            sd = SymplecticData.from_rows(cfg["omega"])
        except KeyError as exc:
            raise FedosovError("config needs an 'omega' matrix") from exc
        if "dim" in cfg and cfg["dim"] != sd.dim:
            raise FedosovError("dim does not match omega")
        if cfg.get("nonconstant"):
            raise FedosovError("non-constant perturbations are not supported")
        pert = []
        for entry in cfg.get("perturbations", []):
            if isinstance(entry, dict):
                k, m = entry["k"], entry["form"]
            else:
                k, m = entry
            if any(isinstance(c, str) and not _is_rational(c) for r in m for c in r):
                raise FedosovError("perturbations must be constant rational 2-forms")
            pert.append((int(k), _mat(m)))
        coords = cfg.get("coords")
        return cls(sd, tuple(pert), int(cfg.get("order", DEFAULT_ORDER)), tuple(coords) if coords else None)

    @classmethod
    def load(cls, path: str) -> "FedosovConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_order(self, order: int) -> "FedosovConfig":
        return FedosovConfig(self.symplectic, self.perturbations, order, self.coords)


def _is_rational(s: str) -> bool:
    try:
        Fraction(s)
        return True
    except (ValueError, ZeroDivisionError):
        return False


# ---------------------------------------------------------------- Moyal--Weyl

_MONO_CACHE: Dict[tuple, Dict[Tuple[int, Exps], Fraction]] = {}
_MONO_LOCK = threading.Lock()


def _moyal_monomials(winv: Matrix, a: Exps, b: Exps, budget: int) -> Dict[Tuple[int, Exps], Fraction]:
    """y^a o y^b as {(k, c): coeff} with lam powers <= budget."""
    key = (winv, a, b, budget)
    hit = _MONO_CACHE.get(key)
    if hit is not None:
        return hit
    d = len(a)
    out: Dict[Tuple[int, Exps], Fraction] = {}
    # pairs of partially differentiated exponents with their weight
    cur: Dict[Tuple[Exps, Exps], Fraction] = {(a, b): Fraction(1)}
    k = 0
    while cur and k <= budget:
        scale = Fraction(1, 2 ** k * factorial(k))
        for (ea, eb), c in cur.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            out[(k, e)] = out.get((k, e), 0) + c * scale
        k += 1
        if k > budget:
            break
        nxt: Dict[Tuple[Exps, Exps], Fraction] = {}
        for (ea, eb), c in cur.items():
            for i in range(d):
                if not ea[i]:
                    continue
                for j in range(d):
                    w = winv[i][j]
                    if not w or not eb[j]:
                        continue
                    na = ea[:i] + (ea[i] - 1,) + ea[i + 1:]
                    nb = eb[:j] + (eb[j] - 1,) + eb[j + 1:]
                    nxt[(na, nb)] = nxt.get((na, nb), 0) + c * w * ea[i] * eb[j]
        cur = {kk: v for kk, v in nxt.items() if v}
    out = {kk: v for kk, v in out.items() if v}
    with _MONO_LOCK:
        _MONO_CACHE.setdefault(key, out)
    return out


def _split(terms, m):
    """{(k, e)} -> {y-part: [(k, x-part, c)]} with the first m exponents as x."""
    out: Dict[Exps, list] = {}
    for (k, e), c in terms.items():
        out.setdefault(e[m:], []).append((k, e[:m], c))
    return out


def moyal_terms(winv: Matrix, m: int, A, B, order: int) -> Dict[Tuple[int, Exps], Fraction]:
    """Moyal product on flat term dicts whose last len(winv) exponents are fiber variables."""
    out: Dict[Tuple[int, Exps], Fraction] = {}
    sa, sb = _split(A, m), _split(B, m)
    for ya, la in sa.items():
        kamin = min(t[0] for t in la)
        for yb, lb in sb.items():
            kbmin = min(t[0] for t in lb)
            budget = order - kamin - kbmin
            if budget < 0:
                continue
            prod = _moyal_monomials(winv, ya, yb, budget)
            for (ka, xa, ca) in la:
                for (kb, xb, cb) in lb:
                    base = ka + kb
                    if base > order:
                        continue
                    xe = tuple(i + j for i, j in zip(xa, xb))
                    cc = ca * cb
                    for (k, ye), c in prod.items():
                        kk = base + k
                        if kk > order:
                            continue
                        key = (kk, xe + ye)
                        v = out.get(key, 0) + cc * c
                        if v:
                            out[key] = v
                        else:
                            out.pop(key, None)
    return out


def moyal(a: PolySeries, b: PolySeries, cfg_or_sd, order: int = None) -> PolySeries:
    """Fiberwise Moyal-Weyl product of two Weyl elements."""
    sd = cfg_or_sd.symplectic if isinstance(cfg_or_sd, FedosovConfig) else cfg_or_sd
    if a.variables != b.variables:
        raise FedosovError("Weyl elements live over different variables")
    d = sd.dim
    m = len(a.variables) - d
    if m < 0:
        raise FedosovError("dimension mismatch between element and symplectic data")
    n = min(a.order, b.order) if order is None else order
    return PolySeries(a.variables, moyal_terms(sd.omega_inv, m, a.terms, b.terms, n), n)


def moyal_base(u: PolySeries, v: PolySeries, sd: SymplecticData) -> PolySeries:
    """Moyal product of functions on the base (derivatives in x, no fiber)."""
    return moyal(u, v, sd)


def lam_commutator(a: PolySeries, b: PolySeries, sd: SymplecticData) -> PolySeries:
    """(1/lam)[a, b] at the common order of a and b (exact division)."""
    n = min(a.order, b.order)
    a1, b1 = a.with_order(n + 1), b.with_order(n + 1)
    c = moyal(a1, b1, sd) - moyal(b1, a1, sd)
    return c.divide_lambda()


# ---------------------------------------------------------------- forms

def _insert_sign(k: int, I: FormIdx) -> Tuple[int, Optional[FormIdx]]:
    """dx^k wedge dx^I = sign dx^{I + k}."""
    if k in I:
        return 0, None
    pos = sum(1 for i in I if i < k)
    return (-1) ** pos, tuple(sorted(I + (k,)))


def _wedge_sign(I: FormIdx, J: FormIdx) -> Tuple[int, Optional[FormIdx]]:
    if set(I) & set(J):
        return 0, None
    seq = list(I + J)
    inv = sum(1 for x in range(len(seq)) for y in range(x + 1, len(seq)) if seq[x] > seq[y])
    return (-1) ** inv, tuple(sorted(seq))


@dataclass(frozen=True)
class WeylForm:
    """sum_I a_I dx^I with Weyl-element coefficients."""

    variables: Tuple[str, ...]
    parts: Tuple[Tuple[FormIdx, PolySeries], ...]
    order: int

    @classmethod
    def from_dict(cls, variables, parts: Mapping[FormIdx, PolySeries], order=None):
        if order is None:
            order = min((p.order for p in parts.values()), default=DEFAULT_ORDER)
        clean = []
        for I, p in sorted(parts.items()):
            if tuple(sorted(set(I))) != tuple(I):
                raise FedosovError("form indices must be strictly increasing")
            p = p.with_order(min(order, p.order)) if p.order != order else p
            if not p.is_zero():
                clean.append((tuple(I), p))
        return cls(tuple(variables), tuple(clean), order)

    @classmethod
    def scalar(cls, a: PolySeries):
        return cls.from_dict(a.variables, {(): a}, a.order)

    @classmethod
    def zero(cls, variables, order):
        return cls(tuple(variables), (), order)

    def as_dict(self) -> Dict[FormIdx, PolySeries]:
        return dict(self.parts)

    def component(self, I: FormIdx) -> PolySeries:
        return self.as_dict().get(tuple(I), PolySeries.zero(self.variables, self.order))

    def is_zero(self) -> bool:
        return not self.parts

    def __add__(self, other: "WeylForm") -> "WeylForm":
        d = self.as_dict()
        for I, p in other.parts:
            d[I] = d[I] + p if I in d else p
        return WeylForm.from_dict(self.variables, d, min(self.order, other.order))

    def __neg__(self):
        return WeylForm(self.variables, tuple((I, -p) for I, p in self.parts), self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "WeylForm":
        return WeylForm.from_dict(self.variables, {I: p * c for I, p in self.parts}, self.order)

    def with_order(self, order) -> "WeylForm":
        return WeylForm.from_dict(self.variables, {I: p.with_order(order) for I, p in self.parts}, order)

    def truncate(self, order) -> "WeylForm":
        return self.with_order(min(order, self.order))

    def form_degrees(self):
        return sorted({len(I) for I, _ in self.parts})

    def __eq__(self, other):
        if not isinstance(other, WeylForm):
            return NotImplemented
        n = min(self.order, other.order)
        return self.truncate(n).parts == other.truncate(n).parts and self.variables == other.variables

    def __hash__(self):
        return hash((self.variables, self.parts))

    def filtration_degree(self, nbase: int) -> int:
        """Lowest deg = y-degree + 2 * lam-power over all terms (the filtration level)."""
        return min((sum(e[nbase:]) + 2 * k for _, p in self.parts for (k, e) in p.terms), default=10 ** 9)

    def __str__(self):
        if not self.parts:
            return "0"
        bits = []
        for I, p in self.parts:
            tag = "^".join(f"dx{i + 1}" for i in I)
            bits.append(f"({p})" + (f"*{tag}" if tag else ""))
        return " + ".join(bits)


def form_mul(A: WeylForm, B: WeylForm, sd: SymplecticData, order=None) -> WeylForm:
    """(a dx^I)(b dx^J) = (a o b) dx^I ^ dx^J."""
    n = min(A.order, B.order) if order is None else order
    out: Dict[FormIdx, PolySeries] = {}
    for I, a in A.parts:
        for J, b in B.parts:
            s, K = _wedge_sign(I, J)
            if not s:
                continue
            prod = moyal(a.with_order(n), b.with_order(n), sd, n) * s
            out[K] = out[K] + prod if K in out else prod
    return WeylForm.from_dict(A.variables, out, n)


def graded_commutator(A: WeylForm, B: WeylForm, sd: SymplecticData, order=None) -> WeylForm:
    # split by degree parity: [A, B] = AB - (-1)^{pq} BA, homogeneous pieces
    n = min(A.order, B.order) if order is None else order
    res = WeylForm.zero(A.variables, n)
    for p in A.form_degrees():
        for q in B.form_degrees():
            Ap = WeylForm.from_dict(A.variables, {I: a for I, a in A.parts if len(I) == p}, A.order)
            Bq = WeylForm.from_dict(B.variables, {J: b for J, b in B.parts if len(J) == q}, B.order)
            ab = form_mul(Ap, Bq, sd, order)
            ba = form_mul(Bq, Ap, sd, order)
            res = res + ab - ba.scale((-1) ** (p * q))
    return res


def lam_graded_commutator(A: WeylForm, B: WeylForm, sd: SymplecticData) -> WeylForm:
    """(1/lam)[A, B] with the graded commutator, computed to the common order."""
    n = min(A.order, B.order)
    c = graded_commutator(A.with_order(n + 1), B.with_order(n + 1), sd, n + 1)
    return WeylForm.from_dict(A.variables, {I: p.divide_lambda() for I, p in c.parts}, n)


def delta(A: WeylForm, nbase: int) -> WeylForm:
    """delta a = dx^k ^ da/dy^k."""
    d = len(A.variables) - nbase
    out: Dict[FormIdx, PolySeries] = {}
    for I, a in A.parts:
        for k in range(d):
            s, K = _insert_sign(k, I)
            if not s:
                continue
            t = a.diff(nbase + k) * s
            if t.is_zero():
                continue
            out[K] = out[K] + t if K in out else t
    return WeylForm.from_dict(A.variables, out, A.order)


def dbase(A: WeylForm, nbase: int) -> WeylForm:
    """The flat covariant derivative: dx^k ^ da/dx^k."""
    out: Dict[FormIdx, PolySeries] = {}
    for I, a in A.parts:
        for k in range(nbase):
            s, K = _insert_sign(k, I)
            if not s:
                continue
            t = a.diff(k) * s
            if t.is_zero():
                continue
            out[K] = out[K] + t if K in out else t
    return WeylForm.from_dict(A.variables, out, A.order)


def delta_inv(A: WeylForm, nbase: int) -> WeylForm:
    """On a term of y-degree p and form degree q, p+q > 0: (1/(p+q)) y^k i(d/dx^k)."""
    out: Dict[Tuple[FormIdx], Dict] = {}
    for I, a in A.parts:
        q = len(I)
        for (k, e), c in a.terms.items():
            p = sum(e[nbase:])
            if p + q == 0:
                continue
            for pos, idx in enumerate(I):
                K = I[:pos] + I[pos + 1:]
                e2 = e[:nbase + idx] + (e[nbase + idx] + 1,) + e[nbase + idx + 1:]
                t = out.setdefault(K, {})
                key = (k, e2)
                v = t.get(key, 0) + c * (-1) ** pos / (p + q)
                if v:
                    t[key] = v
                else:
                    t.pop(key, None)
    return WeylForm.from_dict(A.variables, {K: PolySeries(A.variables, t, A.order) for K, t in out.items()},
                              A.order)


def project00(A: WeylForm, nbase: int) -> WeylForm:
    """The y = 0, form-degree 0 part."""
    a = A.component(())
    t = {(k, e): c for (k, e), c in a.terms.items() if not any(e[nbase:])}
    return WeylForm.from_dict(A.variables, {(): PolySeries(A.variables, t, A.order)}, A.order)


def sigma(a: PolySeries, cfg: FedosovConfig) -> PolySeries:
    """Restrict a Weyl element to y = 0, returning a base series."""
    m = len(cfg.coords)
    t = {(k, e[:m]): c for (k, e), c in a.terms.items() if not any(e[m:])}
    return PolySeries(cfg.coords, t, a.order)


def omega_form(cfg: FedosovConfig, order: int) -> WeylForm:
    """Omega - omega = sum_k lam^k omega_k as a scalar 2-form.

    A matrix M stands for the 2-form (1/2) M_{ji} dx^i ^ dx^j.  With the
    poisson tensor taken as the matrix inverse of omega this is the
    convention under which the curvature identity is the curvature of D.
    """
    V = cfg.variables
    z = (0,) * len(V)
    d = cfg.symplectic.dim
    out: Dict[FormIdx, Dict] = {}
    for k, m in cfg.perturbations:
        if k > order:
            continue
        for i in range(d):
            for j in range(i + 1, d):
                if m[j][i]:
                    t = out.setdefault((i, j), {})
                    t[(k, z)] = t.get((k, z), 0) + m[j][i]
    return WeylForm.from_dict(V, {I: PolySeries(V, t, order) for I, t in out.items()}, order)


def symplectic_form(cfg: FedosovConfig, order: int) -> WeylForm:
    V = cfg.variables
    z = (0,) * len(V)
    d = cfg.symplectic.dim
    parts = {}
    for i in range(d):
        for j in range(i + 1, d):
            w = cfg.symplectic.omega[j][i]
            if w:
                parts[(i, j)] = PolySeries(V, {(0, z): w}, order)
    return WeylForm.from_dict(V, parts, order)


def _max_iterations(order: int, extra: int = 0) -> int:
    return 4 * order + 2 * extra + 8


def build_gamma(cfg: FedosovConfig) -> WeylForm:
    """The unique gamma with delta^{-1} gamma = 0 and Weyl curvature Omega.

    Fixed-point iteration gamma <- delta^{-1}(Omega - omega + d gamma - (1/lam) gamma^2),
    starting from delta^{-1}(Omega - omega); each pass fixes one more
    filtration degree and the loop stops once a pass changes nothing.
    """
    nb = len(cfg.coords)
    sd = cfg.symplectic
    N = cfg.order
    pert = omega_form(cfg, N)
    gamma = delta_inv(pert, nb)
    for _ in range(_max_iterations(N)):
        sq = lam_graded_commutator(gamma, gamma, sd).scale(Fraction(1, 2))
        new = delta_inv(pert + dbase(gamma, nb) - sq, nb)
        if new == gamma:
            return new
        gamma = new
    raise FedosovError("gamma recursion did not stabilise")


def curvature(gamma: WeylForm, cfg: FedosovConfig) -> WeylForm:
    """omega - R + delta gamma - d gamma + (1/lam) gamma^2, with R = 0 on the flat base."""
    nb = len(cfg.coords)
    sq = lam_graded_commutator(gamma, gamma, cfg.symplectic).scale(Fraction(1, 2))
    return symplectic_form(cfg, gamma.order) + delta(gamma, nb) - dbase(gamma, nb) + sq


def connection(a: WeylForm, gamma: WeylForm, cfg: FedosovConfig) -> WeylForm:
    """D a = -delta a + d a - (1/lam)[gamma, a] (graded)."""
    nb = len(cfg.coords)
    n = min(a.order, gamma.order)
    a = a.truncate(n)
    return dbase(a, nb) - delta(a, nb) - lam_graded_commutator(gamma.truncate(n), a, cfg.symplectic)


def _base_to_weyl(a0: PolySeries, cfg: FedosovConfig) -> PolySeries:
    if isinstance(a0, Poly):
        a0 = PolySeries.from_poly(a0, cfg.order)
    if a0.variables != tuple(cfg.coords):
        raise FedosovError(f"base series must be in {cfg.coords}")
    return a0.rename(cfg.variables).with_order(min(cfg.order, a0.order))


def quantize(a0: PolySeries, cfg: FedosovConfig, gamma: WeylForm = None) -> PolySeries:
    """The flat section Q(a0) with sigma(Q(a0)) = a0.

    Iterates a <- a0 + delta^{-1}(d a - (1/lam)[gamma, a]).
    """
    if gamma is None:
        gamma = gamma_for(cfg)
    nb = len(cfg.coords)
    base = _base_to_weyl(a0, cfg)
    A0 = WeylForm.scalar(base)
    a = A0
    extra = int(base.degree) if base.terms else 0
    for _ in range(_max_iterations(cfg.order, extra)):
        rhs = dbase(a, nb) - lam_graded_commutator(gamma.truncate(a.order), a, cfg.symplectic)
        new = A0 + delta_inv(rhs, nb)
        if new == a:
            return new.component(())
        a = new
    raise FedosovError("flat-section iteration did not stabilise")


_GAMMA_CACHE: Dict[FedosovConfig, WeylForm] = {}


def gamma_for(cfg: FedosovConfig) -> WeylForm:
    g = _GAMMA_CACHE.get(cfg)
    if g is None:
        g = _GAMMA_CACHE.setdefault(cfg, build_gamma(cfg))
    return g


_STAR_CACHE: Dict[tuple, Dict[Tuple[int, Exps], Fraction]] = {}
_Q_CACHE: Dict[tuple, PolySeries] = {}


def quantize_monomial(e: Exps, cfg: FedosovConfig) -> PolySeries:
    """Q(x^e), memoized per configuration."""
    key = (cfg, e)
    q = _Q_CACHE.get(key)
    if q is None:
        q = _Q_CACHE.setdefault(key, quantize(PolySeries(cfg.coords, {(0, e): 1}, cfg.order), cfg))
    return q


def _star_monomials(a: Exps, b: Exps, cfg: FedosovConfig) -> Dict[Tuple[int, Exps], Fraction]:
    key = (cfg, a, b)
    hit = _STAR_CACHE.get(key)
    if hit is None:
        prod = sigma(moyal(quantize_monomial(a, cfg), quantize_monomial(b, cfg), cfg.symplectic), cfg)
        hit = _STAR_CACHE.setdefault(key, dict(prod.terms))
    return hit


def fedosov_star(u: PolySeries, v: PolySeries, cfg: FedosovConfig) -> PolySeries:
    """u * v = sigma(Q(u) o Q(v)), expanded bilinearly over cached monomial products."""
    if u.variables != tuple(cfg.coords) or v.variables != tuple(cfg.coords):
        raise FedosovError(f"base series must be in {cfg.coords}")
    n = min(u.order, v.order, cfg.order)
    out: Dict[Tuple[int, Exps], Fraction] = {}
    for (ka, a), ca in u.terms.items():
        for (kb, b), cb in v.terms.items():
            room = n - ka - kb
            if room < 0:
                continue
            c = ca * cb
            for (k, e), cc in _star_monomials(a, b, cfg).items():
                if k <= room:
                    key = (k + ka + kb, e)
                    out[key] = out.get(key, 0) + c * cc
    return PolySeries(cfg.coords, out, n)


def fedosov_star_direct(u: PolySeries, v: PolySeries, cfg: FedosovConfig) -> PolySeries:
    """The same product by quantizing u and v whole, without any caching."""
    gamma = gamma_for(cfg)
    return sigma(moyal(quantize(u, cfg, gamma), quantize(v, cfg, gamma), cfg.symplectic), cfg)


def exp_star_via_Q(f: PolySeries, cfg: FedosovConfig, order: int = None) -> PolySeries:
    """sigma(sum_k Q(f)^{o k} / k!) for f with zero lam^0 part."""
    if order is not None:
        cfg = cfg.with_order(order)
        f = f.with_order(min(order, f.order))
    if f.coeff(0).terms:
        raise FedosovError("star exponential needs f with zero lam^0 part")
    qf = quantize(f, cfg)
    one = PolySeries.const(cfg.variables, 1, qf.order)
    out, term = one, one
    for k in range(1, qf.order + 1):
        term = moyal(term, qf, cfg.symplectic) * Fraction(1, k)
        out = out + term
    return sigma(out, cfg)


def poisson_base(u: PolySeries, v: PolySeries, sd: SymplecticData) -> PolySeries:
    """{u, v} = w^{ij} d_i u d_j v on the base."""
    d = sd.dim
    out = u * 0
    for i in range(d):
        du = u.diff(i)
        if du.is_zero():
            continue
        for j in range(d):
            w = sd.omega_inv[i][j]
            if w:
                out = out + du * v.diff(j) * w
    return out


def moyal_qmm_check(alg, images: Sequence[PolySeries], sd: SymplecticData, max_degree: int = 3,
                    kappa=Fraction(1)) -> CheckReport:
    """Check the quantum moment map axioms for a quadratic realization under Moyal.

    [Phi(X_a), Phi(X_b)] = lam Phi([X_a, X_b]) for all basis pairs, and
    [Phi(X_a), u] = kappa lam {Phi_0(X_a), u} for monomials u of degree <= max_degree.
    """
    report = CheckReport(f"moyal-qmm[{alg.name}]")
    if len(images) != alg.dim:
        raise FedosovError("need one image per basis element")
    V = images[0].variables
    order = images[0].order
    lam = PolySeries.lam(V, order)

    def comm(a, b):
        return moyal_base(a, b, sd) - moyal_base(b, a, sd)

    for a in range(alg.dim):
        for b in range(alg.dim):
            rhs = PolySeries.zero(V, order)
            for k, c in alg.table[a][b]:
                rhs = rhs + images[k] * c
            report.record(comm(images[a], images[b]) == lam * rhs,
                          f"qmm3 ({alg.basis[a]},{alg.basis[b]})")
    for a in range(alg.dim):
        phi0 = PolySeries.from_poly(images[a].coeff(0), order)
        for e in monomials_up_to(len(V), max_degree):
            u = PolySeries(V, {(0, e): 1}, order)
            lhs = comm(images[a], u)
            rhs = lam * poisson_base(phi0, u, sd) * kappa
            report.record(lhs == rhs, f"qmm2 ({alg.basis[a]}, {u})")
    return report
