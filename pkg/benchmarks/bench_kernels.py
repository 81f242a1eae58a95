"""Compare the numba kernels against the pure-numpy fallback.

Covers the two hot paths (banded LU solve, batch cubic evaluation) plus the
full min-stretch replan they feed.  The full-path numpy row is produced by
swapping the kernel bindings in place, which is exactly what
``UTTG_NO_NUMBA=1`` does at import time.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from uttg import kernels
from uttg.spline import (
    BoundaryState,
    KnotSequence,
    StretchWeights,
    build_time_vector,
    min_stretch_spline,
)

DOF = 7
N_WP = 50


def timeit(fn, reps):
    fn()  # warm up (JIT compile, caches)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_banded(rng):
    n = N_WP
    dense = np.zeros((n, n))
    for i in range(n):
        lo, hi = max(0, i - 2), min(n - 1, i + 2)
        dense[i, lo : hi + 1] = rng.normal(size=hi - lo + 1)
    dense[np.arange(n), np.arange(n)] += 5.0
    bands = np.zeros((n, 5))
    for i in range(n):
        lo, hi = max(0, i - 2), min(n - 1, i + 2)
        bands[i, 2 + lo - i : 2 + hi - i + 1] = dense[i, lo : hi + 1]
    rhs = rng.normal(size=(n, DOF))

    def run(factor, solve):
        def body():
            work = bands.copy()
            factor(work, 2, 2, 1e-300)
            solve(work, 2, 2, rhs.copy())

        return body

    rows = []
    if kernels._lu_factor_banded_nb is not None:
        rows.append(
            ("banded LU (5-diag, n=50, 7 rhs)", "numba",
             timeit(run(kernels._lu_factor_banded_nb, kernels._lu_solve_banded_nb), 2000))
        )
    rows.append(
        ("banded LU (5-diag, n=50, 7 rhs)", "numpy",
         timeit(run(kernels.lu_factor_banded_py, kernels.lu_solve_banded_py), 200))
    )
    return rows


def bench_eval(rng):
    n_seg = N_WP + 1
    t_knots = np.concatenate(([0.0], np.cumsum(rng.uniform(0.02, 0.08, n_seg))))
    coeffs = rng.normal(size=(n_seg, 4, DOF))
    ts = np.ascontiguousarray(np.linspace(0, t_knots[-1], 15000))
    pos = np.empty((len(ts), DOF))
    vel = np.empty_like(pos)
    acc = np.empty_like(pos)
    clamped = np.empty(len(ts), dtype=np.bool_)

    rows = []
    if kernels._cubic_eval_batch_nb is not None:
        rows.append(
            ("cubic eval (15k samples x 7 DoF)", "numba",
             timeit(lambda: kernels._cubic_eval_batch_nb(t_knots, coeffs, ts, pos, vel, acc, clamped), 500))
        )
    rows.append(
        ("cubic eval (15k samples x 7 DoF)", "numpy",
         timeit(lambda: kernels.cubic_eval_batch_py(t_knots, coeffs, ts, pos, vel, acc, clamped), 500))
    )
    return rows


def bench_full_replan(rng):
    knots = build_time_vector(np.full(N_WP - 1, 0.05), 0.5)
    q = np.cumsum(rng.normal(0, 0.02, (N_WP, DOF)), axis=0)
    boundary = BoundaryState(
        rng.normal(0, 0.5, DOF), rng.normal(0, 1.0, DOF), np.zeros(DOF), np.zeros(DOF)
    )
    weights = StretchWeights(0.999, np.concatenate(([np.inf], np.ones(N_WP - 1))))

    def body():
        min_stretch_spline(q, weights, boundary, knots)

    rows = []
    saved = (kernels.lu_factor_banded, kernels.lu_solve_banded, kernels.cubic_eval_batch)
    if kernels._lu_factor_banded_nb is not None:
        kernels.lu_factor_banded = kernels._lu_factor_banded_nb
        kernels.lu_solve_banded = kernels._lu_solve_banded_nb
        kernels.cubic_eval_batch = kernels._cubic_eval_batch_nb
        rows.append(("min-stretch replan (50 wp x 7 DoF)", "numba", timeit(body, 100)))
    kernels.lu_factor_banded = kernels.lu_factor_banded_py
    kernels.lu_solve_banded = kernels.lu_solve_banded_py
    kernels.cubic_eval_batch = kernels.cubic_eval_batch_py
    rows.append(("min-stretch replan (50 wp x 7 DoF)", "numpy", timeit(body, 100)))
    kernels.lu_factor_banded, kernels.lu_solve_banded, kernels.cubic_eval_batch = saved
    return rows


def main():
    rng = np.random.default_rng(0)
    print(f"numba available and active: {kernels.USING_NUMBA}")
    rows = bench_banded(rng) + bench_eval(rng) + bench_full_replan(rng)
    print(f"{'benchmark':<38} {'path':<7} {'per call':>12}")
    for name, path, dt in rows:
        print(f"{name:<38} {path:<7} {dt * 1e6:>9.1f} us")
    by_name = {}
    for name, path, dt in rows:
        by_name.setdefault(name, {})[path] = dt
    for name, paths in by_name.items():
        if "numba" in paths and "numpy" in paths:
            print(f"{name}: numba is {paths['numpy'] / paths['numba']:.1f}x faster")


if __name__ == "__main__":
    main()
