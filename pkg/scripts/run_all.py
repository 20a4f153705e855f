#!/usr/bin/env python3
"""Run every verification suite with default settings and print a summary table."""
import argparse
import sys
import time

from specialkahler.cli import SUITES, RunConfig, run


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="reports")
    p.add_argument("--skip", nargs="*", default=[], choices=SUITES)
    args = p.parse_args()
    worst = 0
    summary = []
    for suite in SUITES:
        if suite in args.skip:
            continue
        start = time.perf_counter()
        code, _ = run(RunConfig(suite=suite, out=args.out).validate())
        summary.append((suite, code, time.perf_counter() - start))
        worst = max(worst, code)
    print()
    for suite, code, sec in summary:
        print(f"{suite:15s} exit {code}  {sec:7.1f} s")
    return worst


if __name__ == "__main__":
    sys.exit(main())
