"""Compare the compiled batched kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 200 2000 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from diracgeom import _kernels_py, cartan_quasi as cq, group_geometry as gg

try:
    from diracgeom import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def batch(group, n, seed=0):
    rng = np.random.default_rng(seed)
    pts = [gg.sample_point(rng, group) for _ in range(n)]
    A = np.stack([p.Ad() for p in pts])
    Ai = np.stack([p.Adinv() for p in pts])
    M = []
    for p in pts:
        m = cq.structure_maps(p)
        M.append(np.vstack([m.rho, m.sigma]))
    return A, Ai, np.ascontiguousarray(group.algebra.B), group.algebra.Binv, np.stack(M)


def per_point(A, Ai, B, Binv):
    out = []
    for a, ai in zip(A, Ai):
        out.append(_kernels_py.structure_residuals(a[None], ai[None], B, Binv)[0])
    return np.array(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 2000, 20000])
    ap.add_argument("--groups", nargs="+", default=["so3", "sl2r", "so5"])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the numpy path is timed")
    print("%-6s %7s %-22s %12s %12s %9s" % ("group", "N", "kernel", "numpy [s]", "cython [s]", "speedup"))
    for name in args.groups:
        G = gg.make_group(name)
        for n in args.sizes:
            A, Ai, B, Binv, M = batch(G, n)
            runs = [
                ("structure_residuals", lambda m: m.structure_residuals(A, Ai, B, Binv)),
                ("isotropy_residuals", lambda m: m.isotropy_residuals(M)),
            ]
            for label, fn in runs:
                tp = best_of(lambda: fn(_kernels_py), args.repeat)
                if _kernels is not None:
                    tc = best_of(lambda: fn(_kernels), args.repeat)
                    ref = fn(_kernels_py)
                    # both return roundoff-level residuals, whose size scales with |Ad|^2
                    diff = np.max(np.abs(fn(_kernels) - ref)) / max(1.0, np.max(np.abs(A))) ** 2
                    assert diff < 1e-12, diff
                    print("%-6s %7d %-22s %12.5f %12.5f %8.1fx" % (name, n, label, tp, tc, tp / tc))
                else:
                    print("%-6s %7d %-22s %12.5f %12s %9s" % (name, n, label, tp, "-", "-"))
        if args.sizes:
            n = args.sizes[0]
            A, Ai, B, Binv, _ = batch(G, n)
            tl = best_of(lambda: per_point(A, Ai, B, Binv), 1)
            print("%-6s %7d %-22s %12.5f %12s %9s" % (name, n, "per-point numpy loop", tl, "-", "-"))


if __name__ == "__main__":
    main()
