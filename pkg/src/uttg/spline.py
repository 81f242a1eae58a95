"""Cubic spline trajectory construction on banded linear systems.

Joint trajectories are piecewise cubics determined by knot positions and
knot second derivatives ("m" values).  When boundary velocities *and*
accelerations are assigned, two assistant knots are inserted (splitting the
first and last intervals by a ratio ``beta``) and the unknown interior
second derivatives solve the tridiagonal system ``A m = C S - D``.

Three constructors are provided:

* :func:`interpolating_spline` - passes through every issued waypoint.
* :func:`min_stretch_spline`   - trades waypoint fidelity against the
  integrated squared acceleration of the result, weight ``mu``.
* :func:`static_min_stretch`   - closed-form rest-to-rest variant solving a
  single pentadiagonal system.

Waypoint matrices are oriented rows = knots, columns = joints.  All
per-joint systems share one factorization of the joint-independent band
matrix.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import InvalidDurationError, InvalidParameterError, SingularSystemError

PIVOT_RTOL = 1e-12
MU_FLOOR = 1e-6


def _as_matrix(q) -> np.ndarray:
    """Coerce waypoints to a (knots, joints) float matrix."""
    arr = np.atleast_1d(np.asarray(q, dtype=float))
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class KnotSequence:
    """Raw segment durations plus the assistant-point split ratio."""

    durations: np.ndarray
    beta: float = 0.5

    def __post_init__(self):
        durations = np.asarray(self.durations, dtype=float)
        object.__setattr__(self, "durations", durations)
        if durations.ndim != 1 or durations.size == 0:
            raise InvalidDurationError("need at least one segment duration")
        if not np.all(np.isfinite(durations)) or np.any(durations <= 0.0):
            raise InvalidDurationError(f"durations must be positive, got {durations}")
        if not (0.0 < self.beta < 1.0):
            raise InvalidParameterError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def n_segments(self) -> int:
        return len(self.durations)

    def augmented(self) -> np.ndarray:
        """Time vector with the two assistant splits applied.

        A single raw segment degenerates to the plain split
        ``[beta*T, (1-beta)*T]``; see :func:`_assistant_layout` for the knot
        layout actually used when solving boundary-conditioned systems.
        """
        t = self.durations
        b = self.beta
        if len(t) == 1:
            return np.array([b * t[0], (1.0 - b) * t[0]])
        return np.concatenate(
            (
                [b * t[0], (1.0 - b) * t[0]],
                t[1:-1],
                [(1.0 - b) * t[-1], b * t[-1]],
            )
        )


def build_time_vector(raw_durations, beta: float) -> KnotSequence:
    """Validate raw durations and attach the assistant split ratio."""
    return KnotSequence(np.asarray(raw_durations, dtype=float), float(beta))


@dataclass(frozen=True)
class BoundaryState:
    """Assigned velocities and accelerations at both trajectory ends."""

    v0: np.ndarray
    a0: np.ndarray
    vf: np.ndarray
    af: np.ndarray

    def __post_init__(self):
        for name in ("v0", "a0", "vf", "af"):
            vec = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, vec)
        dims = {self.v0.size, self.a0.size, self.vf.size, self.af.size}
        if len(dims) != 1:
            raise InvalidParameterError("boundary vectors must share one DoF")
        for name in ("v0", "a0", "vf", "af"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidParameterError(f"non-finite boundary entry in {name}")

    @classmethod
    def zero(cls, dof: int) -> "BoundaryState":
        z = np.zeros(dof)
        return cls(z, z.copy(), z.copy(), z.copy())

    @property
    def dof(self) -> int:
        return self.v0.size


@dataclass(frozen=True)
class StretchWeights:
    """Fidelity/smoothness trade-off: weight ``mu`` and per-waypoint ``w``.

    ``w`` entries may be ``np.inf`` to pin a waypoint exactly (used by the
    servo loops to anchor the live start state).  ``mu`` below 1e-6 is
    floored there because ``lam = (1 - mu) / mu`` diverges.
    """

    mu: float
    w: Optional[np.ndarray] = None

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu <= 0.0 or self.mu > 1.0:
            raise InvalidParameterError(f"mu must lie in (0, 1], got {self.mu}")
        object.__setattr__(self, "mu", max(float(self.mu), MU_FLOOR))
        if self.w is not None:
            w = np.asarray(self.w, dtype=float)
            if np.any(w < 0.0) or np.any(np.isnan(w)):
                raise InvalidParameterError("waypoint weights must be >= 0")
            object.__setattr__(self, "w", w)

    @property
    def lam(self) -> float:
        return (1.0 - self.mu) / self.mu

    def weight_vector(self, n_points: int) -> np.ndarray:
        if self.w is None:
            return np.ones(n_points)
        if self.w.size != n_points:
            raise InvalidParameterError(
                f"got {self.w.size} weights for {n_points} waypoints"
            )
        return self.w


class BandMatrix:
    """Square banded matrix in row-diagonal storage.

    ``bands[i, lower + j - i]`` stores entry ``(i, j)``; everything outside
    the band is identically zero.
    """

    def __init__(self, dim: int, lower: int, upper: int, bands: np.ndarray):
        self.dim = dim
        self.lower = lower
        self.upper = upper
        self.bands = np.asarray(bands, dtype=float)
        if self.bands.shape != (dim, lower + upper + 1):
            raise InvalidParameterError("band storage shape mismatch")

    @classmethod
    def from_dense(cls, dense: np.ndarray, lower: int, upper: int) -> "BandMatrix":
        dense = np.asarray(dense, dtype=float)
        n = dense.shape[0]
        if dense.shape != (n, n):
            raise InvalidParameterError("band matrices are square")
        bands = np.zeros((n, lower + upper + 1))
        for i in range(n):
            lo = max(0, i - lower)
            hi = min(n - 1, i + upper)
            bands[i, lower + lo - i : lower + hi - i + 1] = dense[i, lo : hi + 1]
            if np.any(dense[i, :lo] != 0.0) or np.any(dense[i, hi + 1 :] != 0.0):
                raise InvalidParameterError("nonzero entry outside declared band")
        return cls(n, lower, upper, bands)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            lo = max(0, i - self.lower)
            hi = min(self.dim - 1, i + self.upper)
            out[i, lo : hi + 1] = self.bands[i, self.lower + lo - i : self.lower + hi - i + 1]
        return out

    def matmul(self, x: np.ndarray) -> np.ndarray:
        """Band-aware product ``M @ x`` for a vector or matrix ``x``."""
        x = np.asarray(x, dtype=float)
        vec = x.ndim == 1
        xm = x[:, None] if vec else x
        out = np.zeros((self.dim, xm.shape[1]))
        for d in range(-self.lower, self.upper + 1):
            rows = np.arange(max(0, -d), min(self.dim, self.dim - d))
            if rows.size:
                out[rows] += self.bands[rows, self.lower + d, None] * xm[rows + d]
        return out[:, 0] if vec else out


def solve_banded(m: BandMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = rhs`` exploiting the band structure.

    Linear time in the dimension for fixed bandwidth; a pivot below
    ``PIVOT_RTOL`` relative to the largest entry raises
    :class:`SingularSystemError`.
    """
    rhs = np.asarray(rhs, dtype=float)
    vec = rhs.ndim == 1
    x = np.ascontiguousarray(rhs[:, None] if vec else rhs, dtype=float)
    if x.shape[0] != m.dim:
        raise InvalidParameterError("rhs row count must equal matrix dimension")
    work = np.ascontiguousarray(m.bands.copy())
    scale = np.max(np.abs(work))
    if scale == 0.0:
        raise SingularSystemError("zero matrix")
    status = kernels.lu_factor_banded(work, m.lower, m.upper, PIVOT_RTOL * scale)
    if status != 0:
        raise SingularSystemError(f"pivot {status - 1} below relative tolerance")
    x = x.copy()
    kernels.lu_solve_banded(work, m.lower, m.upper, x)
    return x[:, 0] if vec else x


class EvalResult(NamedTuple):
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    clamped: bool


@dataclass(frozen=True)
class CubicSplineTrajectory:
    """Piecewise cubic joint trajectory, immutable after construction.

    ``knot_positions`` / ``knot_second_derivatives`` cover *all* knots of
    the underlying segment sequence (assistant knots included);
    ``issued_knot_indices`` marks the rows that correspond to issued
    waypoints.  Coefficients are derived once at construction so evaluation
    is constant-time per call.
    """

    durations: np.ndarray
    coeffs: np.ndarray  # (n_segments, 4, dof): local cubic a + b*t + c*t^2 + d*t^3
    knot_positions: np.ndarray
    knot_second_derivatives: np.ndarray
    issued_knot_indices: np.ndarray
    t_knots: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.t_knots is None:
            tk = np.concatenate(([0.0], np.cumsum(self.durations)))
            object.__setattr__(self, "t_knots", tk)

    @property
    def dof(self) -> int:
        return self.coeffs.shape[2]

    @property
    def n_segments(self) -> int:
        return self.coeffs.shape[0]

    @property
    def total_duration(self) -> float:
        return float(self.t_knots[-1])

    @property
    def attained_waypoints(self) -> np.ndarray:
        """Knot values at the issued-waypoint knots (the solved ``S``)."""
        return self.knot_positions[self.issued_knot_indices]

    def eval(self, t: float) -> EvalResult:
        """Position/velocity/acceleration at time ``t``; clamps out-of-range."""
        pos, vel, acc, clamped = self.sample(np.array([float(t)]))
        return EvalResult(pos[0], vel[0], acc[0], bool(clamped[0]))

    def sample(self, ts: np.ndarray):
        ts = np.ascontiguousarray(ts, dtype=float)
        m = ts.shape[0]
        pos = np.empty((m, self.dof))
        vel = np.empty((m, self.dof))
        acc = np.empty((m, self.dof))
        clamped = np.empty(m, dtype=np.bool_)
        kernels.cubic_eval_batch(
            np.ascontiguousarray(self.t_knots),
            np.ascontiguousarray(self.coeffs),
            ts,
            pos,
            vel,
            acc,
            clamped,
        )
        return pos, vel, acc, clamped


def eval_trajectory(traj: CubicSplineTrajectory, t: float) -> EvalResult:
    return traj.eval(t)


# ---------------------------------------------------------------------------
# system assembly


@dataclass(frozen=True)
class _AssistantLayout:
    """Knot geometry of the boundary-conditioned problem.

    ``aug`` holds the segment durations after assistant insertion; issued
    waypoints sit at ``issued_idx`` within the 0..n_knots-1 knot range, and
    the interior knots 1..N-1 carry the unknown second derivatives.
    """

    aug: np.ndarray
    issued_idx: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return len(self.aug) - 1


def _assistant_layout(knots: KnotSequence) -> _AssistantLayout:
    t = knots.durations
    n = len(t)
    if n == 1:
        # Both assigned boundary velocities need a free interior knot, so a
        # single raw segment is split three ways rather than two.
        b = knots.beta
        aug = np.array([0.5 * b * t[0], (1.0 - b) * t[0], 0.5 * b * t[0]])
        issued = np.array([0, 3])
    else:
        aug = knots.augmented()
        issued = np.concatenate(([0], np.arange(2, n + 1), [n + 2]))
    return _AssistantLayout(aug, issued)


def assemble_A(knots: KnotSequence) -> BandMatrix:
    """Tridiagonal coefficient matrix of the interior second derivatives."""
    t = knots.durations
    b = knots.beta
    n = len(t)
    pi = 1.0 / (1.0 - b)
    if n == 1:
        lay = _assistant_layout(knots)
        h, g = lay.aug[0], lay.aug[1]
        diag = (2.0 * (h + g) + h * (h + g) / g) / 6.0
        off = (g * g - h * h) / (6.0 * g)
        dense = np.array([[diag, off], [off, diag]])
        return BandMatrix.from_dense(dense, 1, 1)
    dense = np.zeros((n + 1, n + 1))
    dense[0, 0] = (2.0 - b) * pi * t[0]
    dense[0, 1] = (1.0 - b) * t[0]
    dense[n, n] = (2.0 - b) * pi * t[-1]
    dense[n, n - 1] = (1.0 - b) * t[-1]
    for r in range(1, n):
        left = (1.0 - b) * t[0] if r == 1 else t[r - 1]
        right = (1.0 - b) * t[-1] if r == n - 1 else t[r]
        dense[r, r] = 2.0 * (left + right)
        dense[r, r - 1] = (1.0 - 2.0 * b) * pi * t[0] if r == 1 else t[r - 1]
        dense[r, r + 1] = (1.0 - 2.0 * b) * pi * t[-1] if r == n - 1 else t[r]
    dense /= 6.0
    return BandMatrix.from_dense(dense, 1, 1)


def assemble_C(knots: KnotSequence) -> BandMatrix:
    """Second-difference operator from issued waypoints to curvature forcing."""
    t = knots.durations
    b = knots.beta
    n = len(t)
    pi = 1.0 / (1.0 - b)
    if n == 1:
        g = (1.0 - b) * t[0]
        dense = np.array([[-1.0 / g, 1.0 / g], [1.0 / g, -1.0 / g]])
        return BandMatrix.from_dense(dense, 1, 1)
    dense = np.zeros((n + 1, n + 1))
    dense[0, 0] = -pi / t[0]
    dense[0, 1] = pi / t[0]
    dense[n, n - 1] = pi / t[-1]
    dense[n, n] = -pi / t[-1]
    for r in range(1, n):
        left = pi / t[0] if r == 1 else 1.0 / t[r - 1]
        right = pi / t[-1] if r == n - 1 else 1.0 / t[r]
        dense[r, r - 1] = left
        dense[r, r] = -(left + right)
        dense[r, r + 1] = right
    return BandMatrix.from_dense(dense, 1, 1)


def assemble_Abar(raw_durations) -> BandMatrix:
    """Symmetric tridiagonal Gram matrix of the squared-acceleration energy.

    For durations ``T_0..T_{n-1}`` the diagonal is
    ``(1/6)[2 T_0, 2(T_0+T_1), ..., 2 T_{n-1}]`` with off-diagonal
    ``(1/6) T_i``; with the knot second derivatives ``m`` it reproduces
    ``sum_i integral |s''_i|^2`` exactly.
    """
    t = np.asarray(raw_durations, dtype=float)
    if np.any(t <= 0.0) or not np.all(np.isfinite(t)):
        raise InvalidDurationError("durations must be positive")
    n = len(t)
    dense = np.zeros((n + 1, n + 1))
    dense[0, 0] = 2.0 * t[0]
    dense[n, n] = 2.0 * t[-1]
    for r in range(1, n):
        dense[r, r] = 2.0 * (t[r - 1] + t[r])
    for r in range(n):
        dense[r, r + 1] = t[r]
        dense[r + 1, r] = t[r]
    dense /= 6.0
    return BandMatrix.from_dense(dense, 1, 1)


def _boundary_columns(knots: KnotSequence):
    """Columns (d_v0, d_a0, d_vf, d_af) assembling ``D`` from the boundary.

    ``D = v0*d_v0 + a0*d_a0 + vf*d_vf + af*d_af`` per joint.  The exact
    printed form is not part of the public contract; correctness is pinned
    by the boundary-attainment tests.
    """
    t = knots.durations
    b = knots.beta
    n = len(t)
    if n == 1:
        lay = _assistant_layout(knots)
        h, g = lay.aug[0], lay.aug[1]
        d_v0 = np.array([1.0 + h / g, -h / g])
        d_vf = np.array([h / g, -(1.0 + h / g)])
        d_a0 = np.array([h * (3.0 + 2.0 * h / g) / 6.0, -h * h / (3.0 * g)])
        d_af = np.array([-h * h / (3.0 * g), h * (3.0 + 2.0 * h / g) / 6.0])
        return d_v0, d_a0, d_vf, d_af
    pi = 1.0 / (1.0 - b)
    d_v0 = np.zeros(n + 1)
    d_a0 = np.zeros(n + 1)
    d_vf = np.zeros(n + 1)
    d_af = np.zeros(n + 1)
    d_v0[0] = pi
    d_a0[0] = b * t[0] * (3.0 - b) * pi / 6.0
    d_v0[1] += -b * pi
    d_a0[1] += -b * b * t[0] * pi / 3.0
    d_vf[n - 1] += b * pi
    d_af[n - 1] += -b * b * t[-1] * pi / 3.0
    d_vf[n] = -pi
    d_af[n] = b * t[-1] * (3.0 - b) * pi / 6.0
    return d_v0, d_a0, d_vf, d_af


def _boundary_rhs(knots: KnotSequence, boundary: BoundaryState) -> np.ndarray:
    d_v0, d_a0, d_vf, d_af = _boundary_columns(knots)
    return (
        np.outer(d_v0, boundary.v0)
        + np.outer(d_a0, boundary.a0)
        + np.outer(d_vf, boundary.vf)
        + np.outer(d_af, boundary.af)
    )


def _build_trajectory(
    s_vals: np.ndarray,
    m_interior: np.ndarray,
    boundary: BoundaryState,
    knots: KnotSequence,
) -> CubicSplineTrajectory:
    """Recover assistant positions and segment coefficients from (S, m)."""
    lay = _assistant_layout(knots)
    aug = lay.aug
    n_knots = len(aug) + 1
    dof = s_vals.shape[1]

    pos = np.zeros((n_knots, dof))
    pos[lay.issued_idx] = s_vals
    acc = np.zeros((n_knots, dof))
    acc[0] = boundary.a0
    acc[-1] = boundary.af
    acc[1:-1] = m_interior

    h0 = aug[0]
    hl = aug[-1]
    pos[1] = pos[0] + boundary.v0 * h0 + h0 * h0 * (2.0 * boundary.a0 + acc[1]) / 6.0
    pos[-2] = pos[-1] - boundary.vf * hl + hl * hl * (acc[-2] + 2.0 * boundary.af) / 6.0

    n_seg = len(aug)
    coeffs = np.empty((n_seg, 4, dof))
    for i in range(n_seg):
        h = aug[i]
        coeffs[i, 0] = pos[i]
        coeffs[i, 1] = (pos[i + 1] - pos[i]) / h - h * (2.0 * acc[i] + acc[i + 1]) / 6.0
        coeffs[i, 2] = acc[i] / 2.0
        coeffs[i, 3] = (acc[i + 1] - acc[i]) / (6.0 * h)
    return CubicSplineTrajectory(
        durations=aug,
        coeffs=coeffs,
        knot_positions=pos,
        knot_second_derivatives=acc,
        issued_knot_indices=lay.issued_idx,
    )


# ---------------------------------------------------------------------------
# constructors


def interpolating_spline(
    q, boundary: BoundaryState, knots: KnotSequence
) -> CubicSplineTrajectory:
    """Cubic spline through every issued waypoint with assigned boundary.

    Solves the banded system ``A m = C S - D`` for the interior second
    derivatives; assistant-point values are solved, not issued.
    """
    q = _as_matrix(q)
    if q.shape[0] < 2:
        raise InvalidParameterError("need at least two waypoints")
    if q.shape[0] != knots.n_segments + 1:
        raise InvalidParameterError(
            f"{q.shape[0]} waypoints need {q.shape[0] - 1} durations, "
            f"got {knots.n_segments}"
        )
    if boundary.dof != q.shape[1]:
        raise InvalidParameterError("boundary DoF does not match waypoints")
    a = assemble_A(knots)
    c = assemble_C(knots)
    rhs = c.matmul(q) - _boundary_rhs(knots, boundary)
    m = solve_banded(a, rhs)
    return _build_trajectory(q, m, boundary, knots)


def min_stretch_spline(
    q,
    weights: StretchWeights,
    boundary: BoundaryState,
    knots: KnotSequence,
    *,
    smoothness_matrix: Optional[np.ndarray] = None,
    simplified_pullback: bool = False,
) -> CubicSplineTrajectory:
    """Smoothed waypoints: minimize fit error plus stretch energy.

    Solves the first-order optimality system of

        mu * sum_i w_i |s_i - q_i|^2  +  (1 - mu) * integral |s''|^2

    subject to the spline continuity/boundary equations, as one linear
    system (no iterative QP), then rebuilds the trajectory through the
    optimized knots.  Infinite ``w_i`` entries pin waypoints exactly.

    The energy term is nondimensionalized by the mean raw segment duration
    (time measured in units of the input cadence), so a given ``mu``
    trades fidelity against smoothness the same way at any input rate.

    ``smoothness_matrix``/``simplified_pullback`` replace the exact energy
    quadratic with a caller-supplied form in m-space taken at face value,
    unnormalized (the closed-form static solution corresponds to
    ``smoothness_matrix = A`` with the simplified pullback); production
    callers leave both at their defaults.
    """
    q = _as_matrix(q)
    n_pts = q.shape[0]
    if n_pts < 2:
        raise InvalidParameterError("need at least two waypoints")
    if n_pts != knots.n_segments + 1:
        raise InvalidParameterError("waypoint/duration count mismatch")
    if boundary.dof != q.shape[1]:
        raise InvalidParameterError("boundary DoF does not match waypoints")
    mu = weights.mu
    w = weights.weight_vector(n_pts)

    a = assemble_A(knots)
    c = assemble_C(knots)
    d_rhs = _boundary_rhs(knots, boundary)

    if mu == 1.0:
        s_star = q
    else:
        c_dense = c.to_dense()
        b_mat = solve_banded(a, c_dense)  # A^{-1} C
        e = solve_banded(a, d_rhs)  # A^{-1} D
        lay = _assistant_layout(knots)
        if smoothness_matrix is not None:
            if np.any(d_rhs != 0.0):
                raise InvalidParameterError(
                    "smoothness overrides require zero boundary conditions"
                )
            p_ii = np.asarray(smoothness_matrix, dtype=float)
            lin = np.zeros_like(q)
            if simplified_pullback:
                k_mat = c_dense.T @ solve_banded(a, p_ii @ b_mat)
            else:
                k_mat = b_mat.T @ p_ii @ b_mat
            lam = weights.lam
        else:
            gram = assemble_Abar(lay.aug).to_dense()
            p_ii = gram[1:-1, 1:-1]
            m_b = np.stack((boundary.a0, boundary.af))
            g_ib = np.zeros((lay.n_unknowns, 2))
            g_ib[0, 0] = gram[1, 0]
            g_ib[-1, 1] = gram[-2, -1]
            k_mat = b_mat.T @ p_ii @ b_mat
            lin = b_mat.T @ (p_ii @ e - g_ib @ m_b)
            lam = weights.lam * float(np.mean(knots.durations)) ** 3
        free = np.isfinite(w)
        s_star = q.copy()
        if np.any(free):
            w_f = w[free]
            k_ff = k_mat[np.ix_(free, free)]
            sys = np.diag(w_f) + lam * k_ff
            rhs = w_f[:, None] * q[free] + lam * lin[free]
            if np.any(~free):
                rhs -= lam * k_mat[np.ix_(free, ~free)] @ q[~free]
            try:
                s_star[free] = np.linalg.solve(sys, rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularSystemError(str(exc)) from exc

    m = solve_banded(a, c.matmul(s_star) - d_rhs)
    return _build_trajectory(s_star, m, boundary, knots)


def static_min_stretch(q, lam: float, knots: KnotSequence) -> CubicSplineTrajectory:
    """Closed-form min-stretch solution for rest-to-rest motion.

    With zero boundary conditions the optimum solves the single
    pentadiagonal system ``(A + lam C C^T) m = C Q`` with
    ``S* = Q - lam C^T m``; ``lam = 0`` reduces to the interpolating
    spline.
    """
    q = _as_matrix(q)
    if q.shape[0] != knots.n_segments + 1:
        raise InvalidParameterError("waypoint/duration count mismatch")
    if lam < 0.0 or not np.isfinite(lam):
        raise InvalidParameterError(f"lam must be finite and >= 0, got {lam}")
    a = assemble_A(knots)
    c = assemble_C(knots)
    c_dense = c.to_dense()
    penta = a.to_dense() + lam * (c_dense @ c_dense.T)
    m = solve_banded(BandMatrix.from_dense(penta, 2, 2), c.matmul(q))
    s_star = q - lam * (c_dense.T @ m)
    boundary = BoundaryState.zero(q.shape[1])
    return _build_trajectory(s_star, m, boundary, knots)


def stretch_energy(traj: CubicSplineTrajectory) -> float:
    """Integrated squared acceleration, summed over joints.

    Computed as ``tr(m^T G m)`` with ``G`` the energy Gram matrix of the
    trajectory's own segment durations; because the acceleration of a
    cubic is piecewise linear this equals the quadrature exactly.
    """
    gram = assemble_Abar(traj.durations).to_dense()
    m = traj.knot_second_derivatives
    return float(np.einsum("kj,kl,lj->", m, gram, m))


def fit_error(traj: CubicSplineTrajectory, q, w=None) -> float:
    """Weighted squared distance between issued and attained waypoints."""
    q = _as_matrix(q)
    diff = traj.attained_waypoints - q
    if w is None:
        return float(np.sum(diff * diff))
    w = np.asarray(w, dtype=float)
    finite = np.isfinite(w)
    return float(np.sum(w[finite, None] * diff[finite] ** 2))
