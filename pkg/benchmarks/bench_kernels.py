#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--size N] [--repeats R]

The numba flavour is only available when the package was imported with
TORSIONSHAPE_NUMBA unset (the default); the comparison is skipped otherwise.
"""

import argparse
import time

import numpy as np

from torsionshape import kernels


def _timeit(fn, make_args, repeats):
    # rebuild the arguments every repeat: some kernels mutate them in place
    best = float("inf")
    for _ in range(repeats):
        args = make_args()
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _ball_level_set(n):
    xs = np.linspace(-2.0, 2.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    return np.ascontiguousarray(np.hypot(X, Y) - 1.1), xs[1] - xs[0]


def _eikonal_seed(ls):
    inside = ls < 0.0
    flip = np.zeros_like(inside)
    flip[:-1, :] |= inside[:-1, :] != inside[1:, :]
    flip[1:, :] |= inside[:-1, :] != inside[1:, :]
    flip[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    flip[:, 1:] |= inside[:, :-1] != inside[:, 1:]
    dist = np.full(ls.shape, kernels._BIG)
    dist[flip] = np.abs(ls[flip])
    return dist, flip


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=512, help="cells per direction")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    n = args.size
    ls, h = _ball_level_set(n)
    rng = np.random.default_rng(0)
    shape = ls.shape

    coeffs = [rng.uniform(0.5, 2.0, shape) for _ in range(5)]
    for c in coeffs[1:]:
        c[0, :] = c[-1, :] = c[:, 0] = c[:, -1] = 0.0
    p = rng.normal(size=shape)
    out = np.empty(shape)
    vn = rng.normal(size=shape)

    cases = [
        ("poisson_matvec", kernels.poisson_matvec, kernels.poisson_matvec_np,
         lambda: (*coeffs, p, out)),
        ("advect_step", kernels.advect_step, kernels.advect_step_np,
         lambda: (ls, vn, h, 0.4 * h, out)),
        ("eikonal_solve", kernels.eikonal_solve, kernels.eikonal_solve_np,
         lambda: (*_eikonal_seed(ls), h)),
        ("cell_geometry", kernels.cell_geometry, kernels.cell_geometry_np,
         lambda: (ls, h)),
    ]

    mode = "numba" if kernels.USE_NUMBA else "numpy fallback (numba disabled)"
    print(f"grid {n}x{n}, best of {args.repeats}, selected mode: {mode}\n")
    print(f"{'kernel':<16} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for name, fast, slow, make_args in cases:
        t_slow = _timeit(slow, make_args, args.repeats) * 1e3
        if fast is slow:
            print(f"{name:<16} {'-':>12} {t_slow:>12.2f} {'-':>9}")
            continue
        fast(*make_args())  # warm up the JIT outside the timed region
        t_fast = _timeit(fast, make_args, args.repeats) * 1e3
        print(f"{name:<16} {t_fast:>12.2f} {t_slow:>12.2f} {t_slow / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
