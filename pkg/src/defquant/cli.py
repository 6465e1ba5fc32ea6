"""Command-line front end.

Exit codes: 0 success, 1 a mathematical violation was found, 2 usage,
parse or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List

from . import fedosov as fd
from . import orbit as ob
from .expr import ParseError, parse, parse_rational
from .gutt import KAPPA, exp_gutt, gutt_comm, gutt_mul
from .lie import ConfigError, GVector, ch_lambda, load_algebra, validate
from .series import DEFAULT_ORDER, LambdaSeries, PolySeries
from .suites import SUITES, SuiteContext, resolve, run_suites

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class Violation(Exception):
    pass


def _order(args) -> int:
    return args.N if args.N is not None else DEFAULT_ORDER


def _emit(args, value, extra: dict = None):
    """Print a series (or lam-series) in the selected format."""
    if isinstance(value, LambdaSeries):
        value = PolySeries.from_lambda_series(value)
    if args.format == "machine":
        doc = value.machine() if value is not None else {}
        if extra:
            doc.update(extra)
        print(json.dumps(doc, sort_keys=True))
    else:
        print(value)
        for key, text in (extra or {}).items():
            print(f"{key}: {text}")


def _emit_report(args, payload: dict, lines: List[str]):
    if args.format == "machine":
        print(json.dumps(payload, sort_keys=True))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------- commands

def cmd_algebra_validate(args) -> int:
    alg = load_algebra(args.algebra)
    v = validate(alg)
    if v is None:
        _emit_report(args, {"algebra": alg.name, "ok": True}, [f"{alg.name}: ok"])
        return EXIT_OK
    _emit_report(args, {"algebra": alg.name, "ok": False, "violation": v.describe(alg)},
                 [f"{alg.name}: {v.describe(alg)}"])
    return EXIT_VIOLATION


def _valid_algebra(ref: str):
    alg = load_algebra(ref)
    v = validate(alg)
    if v is not None:
        raise Violation(v.describe(alg))
    return alg


def cmd_gutt(args) -> int:
    alg = _valid_algebra(args.algebra)
    N = _order(args)
    xs = [parse(e, alg.coords, N) for e in args.exprs]
    arity = 1 if args.op == "exp" else 2
    if len(xs) != arity:
        raise UsageError(f"gutt {args.op} takes {arity} expression(s)")
    if args.op == "mul":
        _emit(args, gutt_mul(alg, *xs))
    elif args.op == "comm":
        _emit(args, gutt_comm(alg, *xs))
    else:
        xi = _gvector(alg, xs[0])
        if not xi.lambda0_is_zero():
            raise UsageError("gutt exp needs an argument with zero lam^0 part")
        _emit(args, exp_gutt(xi))
    return EXIT_OK


def _gvector(alg, s: PolySeries) -> GVector:
    try:
        return GVector.from_linear(alg, s)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_bch(args) -> int:
    alg = _valid_algebra(args.algebra)
    N = _order(args)
    names = tuple(alg.basis)
    xi = _gvector(alg, parse(args.xi, names, N))
    eta = _gvector(alg, parse(args.eta, names, N))
    _emit(args, ch_lambda(xi, eta, N).as_series(names))
    return EXIT_OK


def _fedosov_config(args) -> fd.FedosovConfig:
    cfg = fd.FedosovConfig.load(args.config)
    if args.N is not None:
        cfg = cfg.with_order(args.N)
    return cfg


def cmd_fedosov(args) -> int:
    cfg = _fedosov_config(args)
    if args.op == "gamma":
        if args.exprs:
            raise UsageError("fedosov gamma takes no expressions")
        gamma = fd.build_gamma(cfg)
        nb = len(cfg.coords)
        if gamma.is_zero():
            payload = {"gamma": {}, "zero": True}
            lines = ["0"]
        else:
            deg = gamma.filtration_degree(nb)
            parts = {"^".join(f"dx{i + 1}" for i in I): p.machine() for I, p in gamma.parts}
            payload = {"gamma": parts, "zero": False, "min_filtration_degree": deg}
            lines = [f"({p})*" + "^".join(f"dx{i + 1}" for i in I) for I, p in gamma.parts]
            lines.append(f"min filtration degree: {deg} (>= 3: {'yes' if deg >= 3 else 'NO'})")
        _emit_report(args, payload, lines)
        if not gamma.is_zero() and gamma.filtration_degree(nb) < 3:
            return EXIT_VIOLATION
        return EXIT_OK
    if len(args.exprs) != 2:
        raise UsageError(f"fedosov {args.op} takes two expressions")
    u, v = (parse(e, cfg.coords, cfg.order) for e in args.exprs)
    if args.op == "star":
        _emit(args, fd.fedosov_star(u, v, cfg))
    else:
        _emit(args, fd.fedosov_star(u, v, cfg) - fd.fedosov_star(v, u, cfg))
    return EXIT_OK


def _orbit_spec(args) -> ob.OrbitSpec:
    spec = ob.OrbitSpec.load(args.spec)
    if args.N is not None:
        spec = spec.with_order(args.N)
    rep = ob.validate_spec(spec)
    if not rep.ok:
        raise Violation("; ".join(rep.messages))
    return spec


def cmd_orbit(args) -> int:
    spec = _orbit_spec(args)
    V = spec.variables
    N = spec.order
    op = args.op
    want = {"reduce": 1, "mul": 2, "cstar": 1, "scoeff": 0, "check": 0}[op]
    if len(args.exprs) != want:
        raise UsageError(f"orbit {op} takes {want} expression(s)")
    if op == "reduce":
        u = parse(args.exprs[0], V, N)
        nf, cert = ob.reduce(u, spec)
        if not ob.certificate_residual(u, nf, cert, spec).is_zero():
            raise Violation("certificate identity failed")
        if args.format == "machine":
            _emit(args, nf, {"certificate": {n: g.machine() for n, g in zip(spec.names, cert)}})
        else:
            _emit(args, nf)
        return EXIT_OK
    if op == "mul":
        a, b = (ob.normal_form(parse(e, V, N), spec) for e in args.exprs)
        _emit(args, ob.quotient_mul(a, b, spec))
        return EXIT_OK
    if op == "cstar":
        try:
            _emit(args, ob.c_star(parse(args.exprs[0], spec.names, N), spec))
        except ob.NotConstantError as exc:
            raise Violation(str(exc)) from exc
        return EXIT_OK
    if op == "scoeff":
        sc = ob.s_coefficients(spec, args.max_j, args.max_degree)
        rows = sorted(sc.coefficients.items(), key=lambda t: (t[0][1], t[0][0]))
        payload = {"ok": sc.ok, "checked": sc.checked,
                   "coefficients": [{"I": list(I), "j": j, "value": str(t)} for (I, j), t in rows if not t.is_zero()],
                   "residuals": [{"I": list(I), "j": j, "value": str(r)}
                                 for (I, j), r in sorted(sc.residuals.items()) if not r.is_zero()]}
        lines = [f"T[{','.join(map(str, I))}; {j}] = {t}" for (I, j), t in rows if not t.is_zero()]
        lines.append(f"reconstruction: {sc.checked - len(payload['residuals'])}/{sc.checked} "
                     f"{'ok' if sc.ok else 'FAIL'}")
        _emit_report(args, payload, lines)
        return EXIT_OK if sc.ok else EXIT_VIOLATION
    rep = ob.qmm_axiom_check(spec, 3, args.kappa)
    _emit_report(args, rep.as_dict(), [rep.summary()] + [f"  failed: {f}" for f in rep.failures])
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_suite(args) -> int:
    try:
        resolve(args.names)
    except KeyError as exc:
        raise UsageError(f"unknown suite {exc.args[0]!r}; choose from {', '.join(SUITES)} or all") from exc
    ctx = SuiteContext(args.seed, args.N, args.kappa)
    results = run_suites(args.names, ctx, args.parallel)
    ok = all(r.ok for r in results)
    payload = {"seed": args.seed, "order": args.N, "kappa": str(args.kappa), "ok": ok,
               "suites": [r.as_dict() for r in results]}
    lines = []
    for r in results:
        lines.append(f"[{'ok' if r.ok else 'FAIL'}] {r.suite}")
        for c in r.checks:
            lines.append(f"    {c.summary()}")
            lines += [f"        failed: {f}" for f in c.failures]
    lines.append("all suites passed" if ok else "some suites FAILED")
    _emit_report(args, payload, lines)
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------- parser

def _kappa(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("-N", type=int, default=d(None), help="truncation order in lam (default 6)")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized suites")
    p.add_argument("--kappa", type=_kappa, default=d(KAPPA), help="convention constant in [xi, u] = kappa lam Pi")
    p.add_argument("--format", choices=("human", "machine"), default=d("human"))
    p.add_argument("--parallel", type=int, default=d(1), help="worker processes for suite runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defquant", description="Exact deformation-quantization workbench.")
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    alg = sub.add_parser("algebra", help="Lie algebra configs")
    alg_sub = alg.add_subparsers(dest="op", required=True)
    v = alg_sub.add_parser("validate", parents=[common], help="check antisymmetry and Jacobi")
    v.add_argument("algebra", help="preset name or JSON path")
    v.set_defaults(func=cmd_algebra_validate)

    g = sub.add_parser("gutt", parents=[common], help="Gutt star product")
    g.add_argument("op", choices=("mul", "comm", "exp"))
    g.add_argument("algebra")
    g.add_argument("exprs", nargs="*")
    g.set_defaults(func=cmd_gutt)

    b = sub.add_parser("bch", parents=[common], help="lam-graded Campbell-Hausdorff series")
    b.add_argument("algebra")
    b.add_argument("xi")
    b.add_argument("eta")
    b.set_defaults(func=cmd_bch)

    f = sub.add_parser("fedosov", parents=[common], help="Fedosov construction on a flat base")
    f.add_argument("op", choices=("gamma", "star", "comm"))
    f.add_argument("config")
    f.add_argument("exprs", nargs="*")
    f.set_defaults(func=cmd_fedosov)

    o = sub.add_parser("orbit", parents=[common], help="coadjoint orbit quotient algebra")
    o.add_argument("op", choices=("reduce", "mul", "cstar", "scoeff", "check"))
    o.add_argument("spec")
    o.add_argument("exprs", nargs="*")
    o.add_argument("--max-j", type=int, default=2)
    o.add_argument("--max-degree", type=int, default=3)
    o.set_defaults(func=cmd_orbit)

    s = sub.add_parser("suite", help="property suites")
    s_sub = s.add_subparsers(dest="op", required=True)
    r = s_sub.add_parser("run", parents=[common], help="run suites by name, or all")
    r.add_argument("names", nargs="+")
    r.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.N is not None and args.N < 0:
        print("error: -N must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except Violation as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (UsageError, ParseError, ConfigError, ob.SpecError, fd.FedosovError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
