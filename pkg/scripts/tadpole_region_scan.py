"""Scan the replicated tadpole coupling over a parameter grid and compare the
two contraction tests with the closed-form margin 2 - m1 - m4 + (m2+m3)^2/4.

    python3 scripts/tadpole_region_scan.py --points 9 --csv scan.csv
"""
import argparse
import csv
import itertools

import numpy as np

from graphext import airy
from graphext.verdicts import Verdict


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--span", type=float, default=2.0)
    ap.add_argument("--csv")
    args = ap.parse_args()
    vals = np.linspace(-args.span, args.span, args.points)
    rows = []
    for m in itertools.product(vals, repeat=4):
        rep = airy.classify_airy(airy.tadpole_coupling(m))
        rows.append({"m1": m[0], "m2": m[1], "m3": m[2], "m4": m[3],
                     "hypothesis": airy.tadpole_hypothesis(m, -1.0),
                     "margin": airy.tadpole_margin(m),
                     "forward": rep.certificates["forward_max_eig"],
                     "adjoint": rep.certificates["adjoint_max_eig"],
                     "contraction": rep.verdict is Verdict.CONTRACTION_GENERATOR})
    inside = [r for r in rows if r["hypothesis"]]
    agree = sum((r["margin"] <= 1e-12) == r["contraction"] for r in rows)
    print(f"{len(rows)} points, {len(inside)} satisfy the hypothesis, "
          f"{sum(r['contraction'] for r in inside)} of those contract")
    print(f"margin sign predicts the verdict at {agree}/{len(rows)} points")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
