"""Sweep the majorant series over a height schedule for several torus points.

Prints one block per point with the fitted log-log slope, and optionally
writes the full table as CSV.  The named points cover the interesting
Diophantine regimes: the origin (resonant, no decay), the golden-ratio
point (badly approximable), and a rational point (eventual resonance).

Usage:
    python3 scripts/run_delta_sweep.py --min-exp 1 --max-exp 6 --points 11
"""

import argparse
import csv
import math
import sys

import numpy as np

from horolab.majorant import MajorantParams, majorant_full

POINTS = {
    "origin": np.zeros((1, 2)),
    "golden": np.array([[(math.sqrt(5.0) - 1.0) / 2.0, (3.0 - math.sqrt(5.0)) / 2.0]]),
    "quadratic": np.array([[math.sqrt(2.0) - 1.0, math.sqrt(3.0) - 1.0]]),
    "rational": np.array([[0.25, 0.4]]),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=float, default=3.0)
    parser.add_argument("--qmax", type=int, default=20)
    parser.add_argument("--min-exp", type=float, default=1.0)
    parser.add_argument("--max-exp", type=float, default=6.0)
    parser.add_argument("--points", type=int, default=11)
    parser.add_argument("--out", help="CSV destination")
    args = parser.parse_args(argv)

    ys = np.logspace(-args.min_exp, -args.max_exp, args.points)
    params = MajorantParams(1, args.m, args.qmax, None)
    rows = []
    for name, xi in POINTS.items():
        vals = []
        for y in ys:
            out = majorant_full(params, xi, float(y))
            vals.append(out.value)
            rows.append((name, float(y), out.value, out.tail_bound))
        slope = np.polyfit(np.log(ys), np.log(vals), 1)[0]
        print(f"{name:10s} delta({ys[0]:.2g})={vals[0]:.5g}  "
              f"delta({ys[-1]:.2g})={vals[-1]:.5g}  slope={slope:+.4f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["point", "y", "value", "tail"])
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
