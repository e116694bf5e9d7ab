"""Compare twisted and untwisted growth of weighted coset sums.

For each scale X the table lists |LHS| under a generic irrational phase
against the untwisted baseline, plus fitted growth exponents for both.
The twisted exponent dropping well below 2 is the cancellation effect.

Usage:
    python3 scripts/run_cancellation.py --scales 25,50,100,200,400
"""

import argparse
import csv
import math
import sys

import numpy as np

from horolab.expsum import CosetSpec, WeightFn, cancellation_report

GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scales", default="25,50,100,200")
    parser.add_argument("--N", type=int, default=1)
    parser.add_argument("--B", type=float, default=1.0)
    parser.add_argument("--out", help="CSV destination")
    args = parser.parse_args(argv)

    Xs = [float(x) for x in args.scales.split(",")]
    spec = CosetSpec.principal(args.N)
    weight = WeightFn(args.B)
    alpha = np.array([GOLD, GOLD**2, GOLD**3, GOLD**4]) / 4.0

    twisted = cancellation_report(spec, weight, alpha, Xs)
    flat = cancellation_report(spec, weight, np.zeros(4), Xs)
    print(f"{'X':>8} {'|twisted|':>12} {'|flat|':>12} {'rhs':>12} {'ratio':>8}")
    for t, f in zip(twisted, flat):
        print(f"{t.X:8.0f} {abs(t.lhs):12.4f} {abs(f.lhs):12.1f} "
              f"{t.rhs:12.1f} {t.ratio:8.4f}")

    lx = np.log([r.X for r in twisted])
    exp_t = np.polyfit(lx, np.log([abs(r.lhs) for r in twisted]), 1)[0]
    exp_f = np.polyfit(lx, np.log([abs(r.lhs) for r in flat]), 1)[0]
    print(f"growth exponents: twisted {exp_t:.3f}, untwisted {exp_f:.3f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["X", "twisted_abs", "flat_abs", "rhs", "ratio"])
            for t, f in zip(twisted, flat):
                writer.writerow([t.X, abs(t.lhs), abs(f.lhs), t.rhs, t.ratio])
        print(f"wrote {len(twisted)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
