"""Compare the trace-space dimension of frame-defined couplings with the
dimension a self-adjoint (or maximal dissipative) extension needs.

    python3 scripts/trace_dimension_scan.py --max-n 6
"""
import argparse

import numpy as np

from graphext import airy, schrodinger
from graphext.graph import MetricGraphSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--seed", type=lambda s: int(s, 0), default=0xC0FFEE)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("Schrodinger L_N couplings (replicated frame)")
    for N in range(1, args.max_n + 1):
        A = rng.standard_normal((N + 1, N + 1))
        spec = schrodinger.matrix_coupling(MetricGraphSpec.looping_edge(N), schrodinger.l_n_matrix(A + A.T))
        c = schrodinger.classify_schrodinger(spec).certificates
        print(f"  N={N}: trace dim {c['trace_dim']}, self-adjoint needs {c['required_dim']}")
    print("Airy replicated couplings, random invertible L, alpha = beta = -1")
    for N in range(1, args.max_n + 1):
        g = MetricGraphSpec.looping_edge(N, 1.0, [(-1.0, -1.0)] * (N + 1))
        fr = airy.build_frame(g, airy.FrameKind.REPLICATED)
        L = rng.standard_normal((fr.n_out, fr.n_in))
        c = airy.classify_airy(airy.MatrixCoupling(fr, L)).certificates
        print(f"  N={N}: trace dim {c['trace_dim']}, maximal dissipative dim {c['max_dissipative_dim']}")


if __name__ == "__main__":
    main()
