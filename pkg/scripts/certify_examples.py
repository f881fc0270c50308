"""Run the dynamical certification on a few catalogued extensions and write
one CSV time series per run.

    python3 scripts/certify_examples.py --out runs/
"""
import argparse
from pathlib import Path

from graphext import airy, evolution, schrodinger
from graphext.graph import MetricGraphSpec


def examples():
    tad = MetricGraphSpec.tadpole(1.0)
    plus = MetricGraphSpec.tadpole(1.0, [(1.0, 1.0), (1.0, 1.0)])
    return {
        "dzn_Z0": schrodinger.dzn_coupling(tad, 0.0),
        "dzn_Z2": schrodinger.dzn_coupling(tad, 2.0),
        "H_Y0": schrodinger.subspace_coupling(tad, [1, 1, 0]),
        "delta_z1": airy.delta_z_coupling(1.0),
        "tadpole_m0020": airy.tadpole_coupling((0.0, 0.0, -2.0, 0.0)),
        "tadpole_m3000": airy.tadpole_coupling((3.0, 0.0, 0.0, 0.0)),
        "Y1_swap": airy.yz_coupling(1.0, plus),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs")
    ap.add_argument("--h", type=float, default=1 / 256)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in examples().items():
        cert = evolution.certify(spec, evolution.Scenario(h=args.h))
        if cert.report is not None:
            cert.report.to_csv(out / f"{name}.csv")
        print(f"{name:15s} {cert.verdict.value:22s} consistent={cert.consistent} {cert.detail}")


if __name__ == "__main__":
    main()
