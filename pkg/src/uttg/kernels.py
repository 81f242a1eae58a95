"""Hot numeric kernels: banded LU and batch spline evaluation.

Each kernel has two implementations: a numba ``@njit`` version and a plain
numpy version.  The numba path is used by default; set ``UTTG_NO_NUMBA=1``
(or run without numba installed) to select the numpy path.  Both are kept
importable so ``benchmarks/bench_kernels.py`` can compare them directly.

Band storage layout: for an ``n x n`` matrix with bandwidths ``(lower,
upper)``, ``bands`` has shape ``(n, lower + upper + 1)`` and
``bands[i, lower + j - i]`` holds entry ``M[i, j]``.  Slots that fall
outside the matrix are zero and never read.
"""

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("UTTG_NO_NUMBA", "").strip() not in ("", "0")

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via UTTG_NO_NUMBA instead
    njit = None
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA and not _FORCE_NUMPY


def lu_factor_banded_py(bands, lower, upper, abs_tol):
    """Unpivoted banded LU, in place.

    Returns 0 on success, or ``k + 1`` if pivot ``k`` fell below ``abs_tol``.
    Fill-in of an unpivoted LU stays inside the band, so no extra storage
    is needed.
    """
    n = bands.shape[0]
    for k in range(n):
        piv = bands[k, lower]
        if abs(piv) < abs_tol:
            return k + 1
        i_max = min(k + lower, n - 1)
        for i in range(k + 1, i_max + 1):
            l = bands[i, lower + k - i] / piv
            bands[i, lower + k - i] = l
            j_max = min(k + upper, n - 1)
            for j in range(k + 1, j_max + 1):
                bands[i, lower + j - i] -= l * bands[k, lower + j - k]
    return 0


def lu_solve_banded_py(bands, lower, upper, x):
    """Solve with a factored band matrix; ``x`` is (n, m) and overwritten."""
    n = bands.shape[0]
    for i in range(1, n):
        k_min = max(0, i - lower)
        for k in range(k_min, i):
            l = bands[i, lower + k - i]
            if l != 0.0:
                x[i] -= l * x[k]
    for i in range(n - 1, -1, -1):
        j_max = min(i + upper, n - 1)
        for j in range(i + 1, j_max + 1):
            u = bands[i, lower + j - i]
            if u != 0.0:
                x[i] -= u * x[j]
        x[i] /= bands[i, lower]
    return x


def cubic_eval_batch_py(t_knots, coeffs, ts, pos, vel, acc, clamped):
    """Evaluate piecewise cubics (local power basis) at many times.

    ``coeffs`` is (n_segments, 4, dof) holding (a, b, c, d) per segment;
    out-of-range times are clamped to the nearer endpoint and flagged.
    """
    total = t_knots[-1]
    tc = np.clip(ts, 0.0, total)
    clamped[:] = (ts < 0.0) | (ts > total)
    idx = np.searchsorted(t_knots, tc, side="right") - 1
    np.clip(idx, 0, coeffs.shape[0] - 1, out=idx)
    tau = (tc - t_knots[idx])[:, None]
    a = coeffs[idx, 0, :]
    b = coeffs[idx, 1, :]
    c = coeffs[idx, 2, :]
    d = coeffs[idx, 3, :]
    pos[:] = a + tau * (b + tau * (c + tau * d))
    vel[:] = b + tau * (2.0 * c + tau * (3.0 * d))
    acc[:] = 2.0 * c + 6.0 * d * tau


if _HAVE_NUMBA:

    @njit(cache=True)
    def _lu_factor_banded_nb(bands, lower, upper, abs_tol):
        n = bands.shape[0]
        for k in range(n):
            piv = bands[k, lower]
            if abs(piv) < abs_tol:
                return k + 1
            i_max = min(k + lower, n - 1)
            for i in range(k + 1, i_max + 1):
                l = bands[i, lower + k - i] / piv
                bands[i, lower + k - i] = l
                j_max = min(k + upper, n - 1)
                for j in range(k + 1, j_max + 1):
                    bands[i, lower + j - i] -= l * bands[k, lower + j - k]
        return 0

    @njit(cache=True)
    def _lu_solve_banded_nb(bands, lower, upper, x):
        n = bands.shape[0]
        m = x.shape[1]
        for i in range(1, n):
            k_min = max(0, i - lower)
            for k in range(k_min, i):
                l = bands[i, lower + k - i]
                if l != 0.0:
                    for col in range(m):
                        x[i, col] -= l * x[k, col]
        for i in range(n - 1, -1, -1):
            j_max = min(i + upper, n - 1)
            for j in range(i + 1, j_max + 1):
                u = bands[i, lower + j - i]
                if u != 0.0:
                    for col in range(m):
                        x[i, col] -= u * x[j, col]
            piv = bands[i, lower]
            for col in range(m):
                x[i, col] /= piv
        return x

    @njit(cache=True)
    def _cubic_eval_batch_nb(t_knots, coeffs, ts, pos, vel, acc, clamped):
        n_seg = coeffs.shape[0]
        dof = coeffs.shape[2]
        total = t_knots[n_seg]
        for s in range(ts.shape[0]):
            t = ts[s]
            if t < 0.0:
                t = 0.0
                clamped[s] = True
            elif t > total:
                t = total
                clamped[s] = True
            else:
                clamped[s] = False
            idx = np.searchsorted(t_knots, t, side="right") - 1
            if idx < 0:
                idx = 0
            elif idx > n_seg - 1:
                idx = n_seg - 1
            tau = t - t_knots[idx]
            for j in range(dof):
                a = coeffs[idx, 0, j]
                b = coeffs[idx, 1, j]
                c = coeffs[idx, 2, j]
                d = coeffs[idx, 3, j]
                pos[s, j] = a + tau * (b + tau * (c + tau * d))
                vel[s, j] = b + tau * (2.0 * c + tau * (3.0 * d))
                acc[s, j] = 2.0 * c + 6.0 * d * tau

else:  # pragma: no cover
    _lu_factor_banded_nb = None
    _lu_solve_banded_nb = None
    _cubic_eval_batch_nb = None


if USING_NUMBA:
    lu_factor_banded = _lu_factor_banded_nb
    lu_solve_banded = _lu_solve_banded_nb
    cubic_eval_batch = _cubic_eval_batch_nb
else:
    lu_factor_banded = lu_factor_banded_py
    lu_solve_banded = lu_solve_banded_py
    cubic_eval_batch = cubic_eval_batch_py
