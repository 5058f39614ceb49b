"""Time every hot kernel under the numpy and numba backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Numba timings exclude compilation: each kernel is called once before timing.
"""
import argparse
import json
import timeit

import numpy as np

from upconcave import kernels
from upconcave.multilinear import CoverageFunction


def cases():
    rng = np.random.default_rng(0)
    y = rng.normal(size=2000)
    x50 = rng.random(50)
    zeta = rng.uniform(1, 5, (10, 50))
    xi = rng.uniform(1, 5, (10, 50))
    p = np.full(10, 0.1)
    table = CoverageFunction(rng.random(14)).table
    x14 = rng.random(14)
    masks = rng.random((20_000, 30)) < 0.3
    r = rng.random(30)
    M = -rng.random((5, 5))
    A = M + M.T
    b = -A.sum(axis=1) + 0.5
    lo, hi = np.zeros(5), np.ones(5)
    return {
        "capped_simplex_project (d=2000)": lambda k: k.capped_simplex_project(y, 1.0, 50.0, 200, 1e-12),
        "coverage_lovasz (N=10, m=50)": lambda k: k.coverage_lovasz(x50, zeta),
        "base_projection (m=50)": lambda k: k.base_projection(x50, 2.0 * zeta[0], 1e-12, 1000),
        "coverage_inner (N=10, m=50)": lambda k: k.coverage_inner(x50, xi, p, 0.125, 0.04, 1.0, 5.0, 1e-5, 2.5, 1e-12, 1000, 200),
        "multilinear_value (m=14)": lambda k: k.multilinear_value(table, x14),
        "multilinear_grad (m=14)": lambda k: k.multilinear_grad(table, x14),
        "coverage_marginals (B=20000, m=30)": lambda k: k.coverage_marginals(masks, r),
        "grid_max_quadratic (d=5, 26/axis)": lambda k: k.grid_max_quadratic(A, b, 0.0, lo, hi, 26),
    }


def bench(fn, impl, repeat):
    fn(impl)
    n, total = 1, 0.0
    # grow the loop count until one sample takes at least 0.1 s
    while True:
        total = timeit.timeit(lambda: fn(impl), number=n)
        if total >= 0.1 or n >= 1 << 20:
            break
        n *= 4
    return min(timeit.repeat(lambda: fn(impl), number=n, repeat=repeat)) / n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args()
    impls = {"numpy": kernels.numpy_impl}
    if kernels.numba_impl is not None:
        impls["numba"] = kernels.numba_impl
    rows = []
    for name, fn in cases().items():
        row = {"kernel": name} | {k: bench(fn, impl, args.repeat) for k, impl in impls.items()}
        if "numba" in row:
            row["speedup"] = row["numpy"] / row["numba"]
        rows.append(row)
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>12}  {'numba':>12}  {'speedup':>8}")
    for r in rows:
        nb = f"{r['numba'] * 1e6:10.1f}us" if "numba" in r else f"{'n/a':>12}"
        sp = f"{r['speedup']:7.1f}x" if "speedup" in r else f"{'':>8}"
        print(f"{r['kernel']:<{width}}  {r['numpy'] * 1e6:10.1f}us  {nb}  {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
