"""Time the compiled kernels against the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``
"""

import argparse
import timeit

import numpy as np

from cutforge.features import normalized_laplacian
from cutforge.graph import gnp_graph
from cutforge.kernels import available_backends


def cases(rng):
    g20 = gnp_graph(20, 0.5, rng)
    g100 = gnp_graph(100, 0.5, rng)
    g22 = gnp_graph(22, 0.5, rng)
    out = []
    for name, g in (("edge_terms n=20", g20), ("edge_terms n=100", g100)):
        W = g.weights
        eu, ev, _ = g.edge_arrays
        args = (np.cos(0.7 * W), np.sin(0.7 * W), eu, ev)
        out.append((name, "edge_terms", args))
    eu, ev, w = g22.edge_arrays
    out.append(("brute_force n=22", "brute_force_maxcut", (g22.n, eu, ev, w)))
    out.append(("jacobi n=100", "jacobi_eigenvalues", (normalized_laplacian(g100),)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    rng = np.random.default_rng(0)
    print(f"{'kernel':22s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for label, fn, fargs in cases(rng):
        times = {}
        for b, mod in backends.items():
            f = getattr(mod, fn)
            times[b] = min(timeit.repeat(lambda: f(*fargs), number=1, repeat=args.repeat))
        row = f"{label:22s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if "native" in times:
            row += f"  {times['python'] / times['native']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
