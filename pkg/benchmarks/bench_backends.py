"""Compare the numba kernels with their numpy twins.

Usage::

    python3 benchmarks/bench_backends.py [--sizes 1000,10000] [--reps 7] [--json out.json]

Each row reports the median wall time of one kernel (or full solve) for
both backends and the numpy/numba ratio.  Compilation happens during the
warm-up calls and is not timed.
"""
import argparse
import json
import statistics
import sys
import time

import numpy as np

from lubrication import (BoundaryConditions, PiecewiseConstant, PiecewiseLinear, assemble_pwc,
                         assemble_pwl, build_stokes_grid, kernels, solve_pwc, solve_pwl)
from lubrication.stokes import _assemble, _colors


def median_time(func, reps, warmup=2):
    for _ in range(warmup):
        func()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases(n, rng):
    x = np.concatenate([[0.0], np.cumsum(rng.uniform(0.5, 1.5, n))])
    const = PiecewiseConstant(x, rng.uniform(0.5, 2.0, n))
    lin = PiecewiseLinear.from_nodes(x, rng.uniform(0.5, 2.0, n + 1))
    bc = BoundaryConditions(Q=1.0, U=0.5)
    pwc = assemble_pwc(const, bc)
    pwl = assemble_pwl(lin, bc)
    S, d, _ = kernels.dominant_recursions(pwc.beta, pwc.excess, backend="numpy")
    T = kernels.partial_products(S)
    r = rng.normal(size=d.size)
    return {
        "tridiag recursions": lambda b: kernels.dominant_recursions(pwc.beta, pwc.excess, backend=b),
        "inverse apply O(N^2)": lambda b: kernels.inverse_apply(S, T, d, r, backend=b),
        "backward sum": lambda b: kernels.backward_sum(-pwl.c, pwl.r, pwl.C_Q, backend=b),
        "PWC solve": lambda b: solve_pwc(pwc, backend=b),
        "PWL solve": lambda b: solve_pwl(pwl, backend=b),
    }


def sor_case(delta):
    grid = build_stokes_grid(PiecewiseConstant([0.0, 16.0, 32.0], [2.0, 1.0]), delta)
    A, b, _ = _assemble(grid, BoundaryConditions(Q=1.0))
    colors = _colors(grid)
    sweepers = {be: kernels.SORSweeper(A, colors, backend=be) for be in ("numpy", "numba")}
    x = np.zeros(A.shape[0])
    return A.shape[0], lambda be: sweepers[be].sweep(x, b, 1.6)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000", help="comma-separated component counts")
    ap.add_argument("--reps", type=int, default=7)
    ap.add_argument("--sor-delta", type=float, default=1 / 16)
    ap.add_argument("--json", default=None, help="also write the rows to this file")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    rows = []
    for n in [int(s) for s in args.sizes.split(",")]:
        for name, func in cases(n, rng).items():
            t = {be: median_time(lambda: func(be), args.reps) for be in ("numpy", "numba")}
            rows.append({"kernel": name, "N": n, **t})
    n_sor, sweep = sor_case(args.sor_delta)
    t = {be: median_time(lambda: sweep(be), args.reps) for be in ("numpy", "numba")}
    rows.append({"kernel": "SOR sweep", "N": n_sor, **t})

    print(f"{'kernel':<24}{'N':>9}{'numpy [s]':>13}{'numba [s]':>13}{'ratio':>9}")
    for r in rows:
        r["ratio"] = r["numpy"] / r["numba"]
        print(f"{r['kernel']:<24}{r['N']:>9}{r['numpy']:>13.3e}{r['numba']:>13.3e}{r['ratio']:>9.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
