"""Recompute c_*(p^k) on the so(3) sphere for several constants c.

For c = 1 and c = 1 + lam^2 the lam^2 coefficient of c_*(p^2) is the frozen
golden value used by the cstar suite.  Also prints p * p for reference.
"""

import argparse

from defquant.expr import parse
from defquant.gutt import gutt_mul
from defquant.orbit import c_star, so3_sphere


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("constants", nargs="*", default=["1", "1 + lam^2", "2 - lam"])
    ap.add_argument("-N", type=int, default=6)
    ap.add_argument("--kmax", type=int, default=3)
    args = ap.parse_args()
    spec = so3_sphere(1, args.N)
    p = parse("x^2 + y^2 + z^2", spec.variables, args.N)
    print(f"p * p = {gutt_mul(spec.algebra, p, p)}")
    for c in args.constants:
        spec = so3_sphere(c, args.N)
        for k in range(1, args.kmax + 1):
            print(f"c = {c}: c_star(p^{k}) = {c_star(f'p^{k}', spec)}")


if __name__ == "__main__":
    main()
