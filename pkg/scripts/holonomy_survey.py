#!/usr/bin/env python3
"""Holonomy of contractible loops and of loops around the cone points, for several weight pairs."""
import argparse
import sys
from math import gcd

from specialkahler.chart_atlas import ChartId, WeightPair, group_of
from specialkahler.special_kahler import axis_holonomy, contractible_loop_study


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-weight", type=int, default=4)
    p.add_argument("--loops", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(f"{'k':>2} {'l':>2} {'su2 defect':>11} {'ratio':>6}  axes")
    for k in range(1, args.max_weight + 1):
        for l in range(k, args.max_weight + 1):
            if gcd(k, l) != 1:
                continue
            kp = WeightPair(k, l)
            study = contractible_loop_study(kp, args.loops, seed=args.seed)
            axes = []
            for chart in ChartId:
                order = group_of(chart, kp).order
                if order > 1:
                    dev = axis_holonomy(kp, chart=chart)["deviation"]
                    axes.append(f"{chart.value}:Z{order} dev {dev:.1e}")
            print(f"{k:>2} {l:>2} {study['max_su2_defect']:11.2e} {study['min_ratio']:6.2f}  {'; '.join(axes)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
