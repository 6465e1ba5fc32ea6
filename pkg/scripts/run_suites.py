"""Run property suites and write the machine report to a file.

    python scripts/run_suites.py --seed 42 --out report.json gutt-assoc weyl
"""

import argparse
import json
import time

from defquant.suites import SUITES, SuiteContext, resolve, run_suites


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=["all"])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("-N", type=int, default=None)
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    try:
        resolve(args.names)
    except KeyError as exc:
        ap.error(f"unknown suite {exc.args[0]!r}; choose from {', '.join(SUITES)}")
    start = time.perf_counter()
    results = run_suites(args.names, SuiteContext(args.seed, args.N), args.parallel)
    secs = time.perf_counter() - start
    for r in results:
        print(f"{'ok  ' if r.ok else 'FAIL'} {r.suite}")
    print(f"{sum(r.ok for r in results)}/{len(results)} suites passed in {secs:.1f} s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"seed": args.seed, "suites": [r.as_dict() for r in results]}, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
