"""Buffered online servo loops: precise and rapid trajectory planning.

The engine consumes filtered, timestamped joint waypoints and emits a
regular stream of position commands at ``dt_output``.  Two planning
policies are provided:

* precise - drains every buffered waypoint and traverses each one in
  order: the replanned spline starts at the live kinematic state, passes
  through all pending waypoints, and only the leading segment is executed
  before the next replan.
* rapid - executes a fixed ``dt_servo`` slice of the live trajectory,
  then replans toward only the newest buffered waypoint (older unvisited
  ones are skipped), blending through the previous trajectory's end point
  to keep acceleration changes gradual.

``ServoEngine.step`` advances one executor cycle and is deterministic
under the simulated clock; :func:`run_servo` drives it for batch runs.
The live WebSocket service paces the same engine against a wall clock.
"""

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    InvalidParameterError,
    OutOfLimitsError,
    TimeAllocationError,
)
from .preprocess import FilterSettings, TimedWaypoint, WaypointFilter
from .spline import (
    BoundaryState,
    CubicSplineTrajectory,
    KnotSequence,
    StretchWeights,
    interpolating_spline,
    min_stretch_spline,
    static_min_stretch,
)
from .urdf import RobotConfig

logger = logging.getLogger(__name__)

TICK_EPS = 1e-9
MERGE_TOL = 1e-6
DILATION_FACTOR = 1.1
MAX_DILATIONS = 50
LIMIT_SAMPLE_HZ = 1000.0

DEFAULT_MU = {"precise": 0.999, "rapid": 0.9}


@dataclass(frozen=True)
class JointLimits:
    """Per-joint position/velocity/acceleration bounds."""

    position: np.ndarray  # (dof, 2)
    velocity: np.ndarray  # (dof,)
    acceleration: np.ndarray  # (dof,)

    @classmethod
    def from_config(cls, config: RobotConfig) -> "JointLimits":
        return cls(
            np.asarray(config.position_limits, dtype=float),
            np.asarray(config.velocity_limits, dtype=float),
            np.asarray(config.acceleration_limits, dtype=float),
        )

    @property
    def dof(self) -> int:
        return len(self.velocity)


@dataclass
class ServoSettings:
    """Operator-tunable servo parameters."""

    mode: str = "precise"
    mu: Optional[float] = None  # defaults per mode when left unset
    beta: float = 0.5
    dt_output: float = 0.005
    dt_servo: float = 0.05
    buffer_capacity: int = 1024

    def __post_init__(self):
        if self.mode not in ("precise", "rapid"):
            raise InvalidParameterError(f"unknown mode '{self.mode}'")
        if self.dt_output <= 0.0:
            raise InvalidParameterError("dt_output must be > 0")
        if self.dt_servo < self.dt_output:
            raise InvalidParameterError("dt_servo must be >= dt_output")
        if not (0.0 < self.beta < 1.0):
            raise InvalidParameterError("beta must lie in (0, 1)")
        if self.mu is not None and not (0.0 < self.mu <= 1.0):
            raise InvalidParameterError("mu must lie in (0, 1]")

    def effective_mu(self) -> float:
        return DEFAULT_MU[self.mode] if self.mu is None else self.mu


class Command(NamedTuple):
    tick: int
    t: float
    q: np.ndarray
    clamped: bool


class WaypointBuffer:
    """FIFO of timed waypoints; drop-oldest on overflow, drop-stale on push."""

    def __init__(self, capacity: int = 1024):
        self.capacity = capacity
        self.entries: deque[TimedWaypoint] = deque()
        self.dropped_stale = 0
        self.dropped_overflow = 0
        self._last_ts: Optional[float] = None

    def __len__(self) -> int:
        return len(self.entries)

    def push(self, wp: TimedWaypoint) -> bool:
        if self._last_ts is not None and wp.t <= self._last_ts:
            self.dropped_stale += 1
            return False
        self._last_ts = wp.t
        self.entries.append(wp)
        if len(self.entries) > self.capacity:
            self.entries.popleft()
            self.dropped_overflow += 1
        return True

    def drain(self) -> list[TimedWaypoint]:
        out = []
        while self.entries:
            out.append(self.entries.popleft())
        return out

    def pop_oldest(self) -> Optional[TimedWaypoint]:
        return self.entries.popleft() if self.entries else None

    def pop_latest(self) -> tuple[Optional[TimedWaypoint], int]:
        """Newest waypoint plus the count of older ones discarded."""
        if not self.entries:
            return None, 0
        skipped = len(self.entries) - 1
        wp = self.entries[-1]
        self.entries.clear()
        return wp, skipped


def heuristic_duration(dq: np.ndarray, limits: JointLimits, dt_floor: float) -> float:
    """Minimum segment time from the rest-to-rest cubic peak formulas."""
    dq = np.abs(np.asarray(dq, dtype=float))
    t_vel = np.max(1.5 * dq / limits.velocity)
    t_acc = np.max(np.sqrt(6.0 * dq / limits.acceleration))
    return max(t_vel, t_acc, dt_floor)


def _limit_samples(traj: CubicSplineTrajectory) -> np.ndarray:
    grid = np.arange(0.0, traj.total_duration, 1.0 / LIMIT_SAMPLE_HZ)
    return np.unique(np.concatenate((grid, traj.t_knots)))


def _check_limits(traj: CubicSplineTrajectory, limits: JointLimits):
    """(compliant, max|v|, max|a|) sampled at 1 kHz plus knot times."""
    ts = _limit_samples(traj)
    _, vel, acc, _ = traj.sample(ts)
    max_v = np.max(np.abs(vel), axis=0)
    max_a = np.max(np.abs(acc), axis=0)
    ok = np.all(max_v <= limits.velocity * (1.0 + 1e-9)) and np.all(
        max_a <= limits.acceleration * (1.0 + 1e-9)
    )
    return ok, max_v, max_a


@dataclass
class _BuiltPlan:
    durations: np.ndarray
    trajectory: CubicSplineTrajectory
    max_velocity: np.ndarray
    max_acceleration: np.ndarray
    dilations: int


def _allocate_and_build(
    builder: Callable[[np.ndarray], CubicSplineTrajectory],
    initial_durations: np.ndarray,
    limits: JointLimits,
) -> _BuiltPlan:
    """Dilate durations by 1.1x until the built trajectory respects limits."""
    durations = np.asarray(initial_durations, dtype=float).copy()
    for attempt in range(MAX_DILATIONS + 1):
        traj = builder(durations)
        ok, max_v, max_a = _check_limits(traj, limits)
        if ok:
            return _BuiltPlan(durations, traj, max_v, max_a, attempt)
        durations = durations * DILATION_FACTOR
    raise TimeAllocationError(
        f"no limit-compliant timing after {MAX_DILATIONS} dilations"
    )


def initial_durations(
    waypoints: np.ndarray,
    stamps: Optional[np.ndarray],
    limits: JointLimits,
    dt_floor: float,
) -> np.ndarray:
    """Per-gap timing: timestamp gaps when usable, else the heuristic."""
    n_seg = waypoints.shape[0] - 1
    out = np.empty(n_seg)
    for i in range(n_seg):
        gap = None
        if stamps is not None and stamps[i] is not None and stamps[i + 1] is not None:
            gap = float(stamps[i + 1]) - float(stamps[i])
        if gap is not None and gap > 0.0:
            out[i] = max(gap, dt_floor)
        else:
            out[i] = heuristic_duration(
                waypoints[i + 1] - waypoints[i], limits, dt_floor
            )
    return out


def allocate_times(
    waypoints,
    stamps,
    limits: JointLimits,
    *,
    dt_floor: float = 0.005,
    beta: float = 0.5,
    builder: Optional[Callable] = None,
) -> np.ndarray:
    """Limit-respecting segment durations for a waypoint sequence.

    Starts from timestamp gaps (or the velocity/acceleration heuristic when
    stamps are missing or non-increasing), then dilates all durations by
    1.1x until the constructed spline stays inside the joint limits at
    1 kHz sampling.  Raises :class:`TimeAllocationError` after 50 rounds.
    """
    waypoints = np.asarray(waypoints, dtype=float)
    if waypoints.ndim == 1:
        waypoints = waypoints[:, None]
    if waypoints.shape[0] < 2:
        raise InvalidParameterError("need at least two waypoints")
    if builder is None:
        dof = waypoints.shape[1]

        def builder(durations):
            return interpolating_spline(
                waypoints, BoundaryState.zero(dof), KnotSequence(durations, beta)
            )

    start = initial_durations(waypoints, stamps, limits, dt_floor)
    return _allocate_and_build(builder, start, limits).durations


def solve_ptp(
    q_from,
    q_to,
    limits: JointLimits,
    beta: float = 0.5,
    dt_floor: float = 0.005,
) -> CubicSplineTrajectory:
    """Rest-to-rest point-to-point trajectory over one raw segment.

    Uses the closed-form static solution with zero smoothing weight so both
    endpoints are attained exactly; the duration comes from the peak-value
    heuristic plus the dilation loop.  ``q_from`` must be inside the
    position limits; ``q_to`` is clamped into them.
    """
    q_from = np.asarray(q_from, dtype=float)
    q_to = np.asarray(q_to, dtype=float)
    lo, hi = limits.position[:, 0], limits.position[:, 1]
    if np.any(q_from < lo - 1e-9) or np.any(q_from > hi + 1e-9):
        raise OutOfLimitsError("current position outside limits")
    q_goal = np.clip(q_to, lo, hi)
    if not np.array_equal(q_goal, q_to):
        logger.warning("ptp target clamped into position limits")
    q_mat = np.vstack((q_from, q_goal))

    def builder(durations):
        return static_min_stretch(q_mat, 0.0, KnotSequence(durations, beta))

    t0 = heuristic_duration(q_goal - q_from, limits, dt_floor)
    return _allocate_and_build(builder, np.array([t0]), limits).trajectory


def plan_joint_path(q_current, q_end, q_new, merge_tol: float = MERGE_TOL) -> np.ndarray:
    """Rapid-mode key points [current, previous end, newest waypoint].

    Consecutive points closer than ``merge_tol`` (max-norm) are merged, so
    the result has one to three rows.
    """
    pts = [np.asarray(q_current, dtype=float)]
    for cand in (np.asarray(q_end, dtype=float), np.asarray(q_new, dtype=float)):
        if np.max(np.abs(cand - pts[-1])) >= merge_tol:
            pts.append(cand)
    return np.vstack(pts)


def execute_trajectory(
    traj: CubicSplineTrajectory,
    horizon: float,
    settings: ServoSettings,
    start_offset: float = 0.0,
    t_base: float = 0.0,
) -> list[Command]:
    """Sample one command per ``dt_output`` tick across ``horizon``.

    The horizon is clamped to the remaining duration; the command count is
    ``floor(horizon / dt_output)`` and every position lies exactly on the
    trajectory.
    """
    dt = settings.dt_output
    horizon = min(horizon, traj.total_duration - start_offset)
    n = int(np.floor(horizon / dt + TICK_EPS))
    if n <= 0:
        return []
    ts = start_offset + dt * np.arange(1, n + 1)
    pos, _, _, _ = traj.sample(ts)
    return [
        Command(k + 1, t_base + ts[k] - start_offset, pos[k].copy(), False)
        for k in range(n)
    ]


@dataclass
class StitchRecord:
    t: float
    dpos: float
    dvel: float
    dacc: float


@dataclass
class Diagnostics:
    replans: int = 0
    ptp_starts: int = 0
    waypoints_in: int = 0
    waypoints_forwarded: int = 0
    suppressed: int = 0
    dropped_stale: int = 0
    dropped_overflow: int = 0
    skipped_rapid: int = 0
    clamped_commands: int = 0
    clamped_targets: int = 0
    holds_emitted: int = 0
    plan_times: list = field(default_factory=list)
    max_abs_velocity: Optional[np.ndarray] = None
    max_abs_acceleration: Optional[np.ndarray] = None
    max_stitch_pos: float = 0.0
    max_stitch_vel: float = 0.0
    max_stitch_acc: float = 0.0

    def fold_maxima(self, max_v: np.ndarray, max_a: np.ndarray) -> None:
        if self.max_abs_velocity is None:
            self.max_abs_velocity = max_v.copy()
            self.max_abs_acceleration = max_a.copy()
        else:
            np.maximum(self.max_abs_velocity, max_v, out=self.max_abs_velocity)
            np.maximum(self.max_abs_acceleration, max_a, out=self.max_abs_acceleration)


@dataclass
class ServoState:
    """Snapshot of the engine's live kinematic and planning state."""

    start_servo: bool
    t_now: Optional[float]
    traj_clock: Optional[float]
    current_traj: Optional[CubicSplineTrajectory]
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray


class ServoEngine:
    """Single-consumer servo core; deterministic under the simulated clock.

    One ``step()`` = one executor cycle: execute a horizon of the live
    trajectory (emitting grid-aligned commands), ingest fresh inputs, then
    replan per the active mode.  All commands land on the global tick grid
    anchored at the first forwarded waypoint's timestamp.
    """

    def __init__(
        self,
        config: RobotConfig,
        settings: ServoSettings,
        initial_q,
        filter_settings: Optional[FilterSettings] = None,
        record_trajectories: bool = False,
    ):
        self.limits = JointLimits.from_config(config)
        self.settings = settings
        self.q = np.asarray(initial_q, dtype=float).copy()
        if self.q.shape != (self.limits.dof,):
            raise InvalidParameterError(
                f"initial_q must have length {self.limits.dof}"
            )
        self.qd = np.zeros(self.limits.dof)
        self.qdd = np.zeros(self.limits.dof)
        self.filter = WaypointFilter(filter_settings or FilterSettings())
        self.buffer = WaypointBuffer(settings.buffer_capacity)
        self.start_servo = True

        self.t0: Optional[float] = None  # tick-grid origin
        self.t_now: Optional[float] = None
        self.next_tick = 1
        self.traj: Optional[CubicSplineTrajectory] = None
        self.t_traj = 0.0
        self.cursor = 1
        self.pending: list[TimedWaypoint] = []
        self.last_attained_ts: Optional[float] = None
        self._first_time = True
        self._last_pop_ts: Optional[float] = None
        self._prev_wp: Optional[TimedWaypoint] = None

        self.diag = Diagnostics()
        self.stitches: list[StitchRecord] = []
        self.attainments: list[tuple[float, float]] = []
        self.rapid_pops: list[tuple[float, np.ndarray]] = []
        self.trajectories: list[tuple[float, CubicSplineTrajectory]] = []
        self._record_trajs = record_trajectories

    # ------------------------------------------------------------------ API

    @property
    def started(self) -> bool:
        return self.t0 is not None

    @property
    def idle(self) -> bool:
        return self.traj is None and len(self.buffer) == 0

    @property
    def state(self) -> ServoState:
        clock = None if self.traj is None else self.t_now - self.t_traj
        return ServoState(
            self.start_servo, self.t_now, clock, self.traj, self.q, self.qd, self.qdd
        )

    def push_input(self, t: float, q) -> bool:
        """Raw sample -> filter -> buffer.  Returns True when forwarded."""
        self.diag.waypoints_in += 1
        try:
            out = self.filter.process(TimedWaypoint(float(t), np.asarray(q, float)))
        except Exception:
            self.diag.dropped_stale += 1
            return False
        if out is None:
            self.diag.suppressed += 1
            return False
        self.diag.waypoints_forwarded += 1
        if not self.buffer.push(out):
            self.diag.dropped_stale += 1
            return False
        return True

    def request_stop(self) -> None:
        self.start_servo = False

    def park_until(self, t_target: float) -> list[Command]:
        """Advance the clock with hold commands while no trajectory runs."""
        if not self.started:
            return []
        cmds = self._emit_constant(t_target)
        self.diag.holds_emitted += len(cmds)
        self.t_now = max(self.t_now, t_target)
        # holding station counts as staying current with the stream
        if self.last_attained_ts is not None:
            self.last_attained_ts = max(self.last_attained_ts, self.t_now)
        return cmds

    def step(self, ingest: Optional[Callable[[float], None]] = None) -> list[Command]:
        """One executor cycle; returns the commands it emitted."""
        if self.traj is None and not self._begin_motion():
            return []
        if self.settings.mode == "precise":
            horizon_local = self.traj.t_knots[self.traj.issued_knot_indices[self.cursor]]
            cmds = self._emit_until(self.t_traj + horizon_local)
            self._advance_live(horizon_local)
            if ingest is not None:
                ingest(self.t_now)
            self._replan_precise()
            return cmds
        return self._rapid_cycle(ingest)

    def _rapid_cycle(self, ingest: Optional[Callable[[float], None]]) -> list[Command]:
        """Execute a fixed dt_servo window, then replan toward the newest
        waypoint.

        If the live trajectory runs out inside the window the engine brakes
        to rest (starvation) or holds, so the window always spans exactly
        dt_servo of clock time and pops happen at that fixed cadence.
        """
        cmds: list[Command] = []
        window_end = self.t_now + self.settings.dt_servo
        while True:
            traj_end = self.t_traj + self.traj.total_duration
            target = min(window_end, traj_end)
            cmds.extend(self._emit_until(target))
            self._advance_live(target - self.t_traj)
            if target >= window_end - TICK_EPS:
                break
            # trajectory exhausted mid-window
            if np.max(np.abs(self.qd)) > 1e-9:
                self._brake_to_rest()
                continue
            cmds.extend(self._emit_constant(window_end))
            self.t_now = window_end
            break

        if ingest is not None:
            ingest(self.t_now)
        self._replan_rapid()
        return cmds

    # ------------------------------------------------------------- internals

    def _start_clock(self, t: float) -> None:
        self.t0 = t
        self.t_now = t
        self.next_tick = 1

    def _clamp_target(self, q: np.ndarray) -> np.ndarray:
        lo, hi = self.limits.position[:, 0], self.limits.position[:, 1]
        goal = np.clip(q, lo, hi)
        if np.max(np.abs(goal - q)) > 0.0:
            self.diag.clamped_targets += 1
        return goal

    def _begin_motion(self) -> bool:
        """Start a trajectory when none is live.

        The very first target goes through the point-to-point starter (it
        may lie far from the initial robot state); afterwards the engine is
        at rest at a known point and new targets replan from the live state
        like any other cycle.
        """
        if not self._first_time:
            if self.settings.mode == "rapid":
                wp, skipped = self.buffer.pop_latest()
                if wp is None:
                    return False
                self.diag.skipped_rapid += skipped
                self._rapid_plan(wp)
            else:
                fresh = self.buffer.drain()
                if not fresh:
                    return False
                targets = [TimedWaypoint(w.t, self._clamp_target(w.q)) for w in fresh]
                plan = self._plan_through(targets)
                self._install(plan, targets, stitch=True)
            return True

        if self.settings.mode == "rapid":
            wp, skipped = self.buffer.pop_latest()
            self.diag.skipped_rapid += skipped
        else:
            wp = self.buffer.pop_oldest()
        if wp is None:
            return False
        if not self.started:
            self._start_clock(wp.t)
        goal = self._clamp_target(wp.q)
        q_mat = np.vstack((self.q, goal))

        def builder(durations):
            return static_min_stretch(
                q_mat, 0.0, KnotSequence(durations, self.settings.beta)
            )

        t_start = time.perf_counter()
        t_init = heuristic_duration(goal - self.q, self.limits, self.settings.dt_output)
        plan = _allocate_and_build(builder, np.array([t_init]), self.limits)
        self.diag.plan_times.append(time.perf_counter() - t_start)
        self.diag.ptp_starts += 1
        self._first_time = False
        self._last_pop_ts = wp.t
        self.last_attained_ts = wp.t
        self._prev_wp = TimedWaypoint(wp.t, goal)
        self._install(plan, [TimedWaypoint(wp.t, goal)], stitch=False)
        return True

    def _install(self, plan: _BuiltPlan, pending: list[TimedWaypoint], stitch: bool) -> None:
        if stitch:
            new0 = plan.trajectory.eval(0.0)
            rec = StitchRecord(
                self.t_now,
                float(np.max(np.abs(new0.position - self.q))),
                float(np.max(np.abs(new0.velocity - self.qd))),
                float(np.max(np.abs(new0.acceleration - self.qdd))),
            )
            self.stitches.append(rec)
            self.diag.max_stitch_pos = max(self.diag.max_stitch_pos, rec.dpos)
            self.diag.max_stitch_vel = max(self.diag.max_stitch_vel, rec.dvel)
            self.diag.max_stitch_acc = max(self.diag.max_stitch_acc, rec.dacc)
        self.traj = plan.trajectory
        self.t_traj = self.t_now
        self.cursor = 1
        self.pending = pending
        self.diag.fold_maxima(plan.max_velocity, plan.max_acceleration)
        if self._record_trajs:
            self.trajectories.append((self.t_traj, plan.trajectory))

    def _emit_until(self, t_limit: float) -> list[Command]:
        dt = self.settings.dt_output
        cmds: list[Command] = []
        ticks = []
        while self.t0 + self.next_tick * dt <= t_limit + TICK_EPS:
            ticks.append(self.next_tick)
            self.next_tick += 1
        if not ticks:
            return cmds
        ts_local = self.t0 + np.array(ticks, dtype=float) * dt - self.t_traj
        pos, _, _, _ = self.traj.sample(ts_local)
        lo, hi = self.limits.position[:, 0], self.limits.position[:, 1]
        clipped = np.clip(pos, lo, hi)
        for i, tick in enumerate(ticks):
            was_clamped = bool(np.any(clipped[i] != pos[i]))
            if was_clamped:
                self.diag.clamped_commands += 1
            cmds.append(Command(tick, self.t0 + tick * dt, clipped[i], was_clamped))
        return cmds

    def _emit_constant(self, t_limit: float) -> list[Command]:
        dt = self.settings.dt_output
        cmds = []
        while self.t0 + self.next_tick * dt <= t_limit + TICK_EPS:
            cmds.append(
                Command(self.next_tick, self.t0 + self.next_tick * dt, self.q.copy(), False)
            )
            self.next_tick += 1
        return cmds

    def _advance_live(self, traj_local_t: float) -> None:
        res = self.traj.eval(traj_local_t)
        self.q = res.position
        self.qd = res.velocity
        self.qdd = res.acceleration
        self.t_now = self.t_traj + traj_local_t
        if self.settings.mode == "precise" and self.cursor - 1 < len(self.pending):
            wp = self.pending[self.cursor - 1]
            if np.isfinite(wp.t):
                err = float(np.max(np.abs(self.q - wp.q)))
                self.attainments.append((wp.t, err))
                self.last_attained_ts = wp.t

    def _terminal_velocity(self, targets: list[TimedWaypoint]) -> np.ndarray:
        """Assigned velocity at the plan's final waypoint.

        Estimated from the waypoint stream by finite differences so the
        trajectory flows through intermediate targets instead of braking at
        each one; zero once the monitor has signaled stop and the buffer is
        drained (the final plan comes to rest at the last waypoint).
        """
        if not self.start_servo and len(self.buffer) == 0:
            return np.zeros_like(self.qd)
        last = targets[-1]
        prev = targets[-2] if len(targets) >= 2 else self._prev_wp
        if prev is None or not np.isfinite(last.t) or last.t - prev.t <= 0.0:
            return np.zeros_like(self.qd)
        v_hat = (last.q - prev.q) / (last.t - prev.t)
        return np.clip(v_hat, -self.limits.velocity, self.limits.velocity)

    def _plan_through(
        self,
        targets: list[TimedWaypoint],
        initial: Optional[np.ndarray] = None,
    ) -> _BuiltPlan:
        """Min-stretch replan from the live state through ``targets``."""
        q_mat = np.vstack([self.q] + [wp.q for wp in targets])
        boundary = BoundaryState(
            self.qd, self.qdd, self._terminal_velocity(targets), np.zeros_like(self.qd)
        )
        w = np.ones(q_mat.shape[0])
        w[0] = np.inf  # the live state is not negotiable
        if self.settings.mode == "precise":
            # precise mode passes through each issued waypoint: the segment
            # about to execute lands on it exactly; mu shapes the preview
            w[1] = np.inf
        weights = StretchWeights(self.settings.effective_mu(), w)
        beta = self.settings.beta

        def builder(durations):
            return min_stretch_spline(
                q_mat, weights, boundary, KnotSequence(durations, beta)
            )

        if initial is None:
            stamps = [self.last_attained_ts] + [wp.t for wp in targets]
            initial = initial_durations(
                q_mat, stamps, self.limits, self.settings.dt_output
            )
        t_start = time.perf_counter()
        plan = _allocate_and_build(builder, np.asarray(initial, float), self.limits)
        self.diag.plan_times.append(time.perf_counter() - t_start)
        self.diag.replans += 1
        self._prev_wp = targets[-1]
        return plan

    def _brake_to_rest(self) -> None:
        """Starved mid-motion: plan a stop instead of holding discontinuously."""
        t_b = max(
            float(np.max(1.5 * np.abs(self.qd) / self.limits.acceleration)),
            self.settings.dt_output,
        )
        lo, hi = self.limits.position[:, 0], self.limits.position[:, 1]
        stop_q = np.clip(self.q + self.qd * t_b / 2.0, lo, hi)
        boundary = BoundaryState(
            self.qd, self.qdd, np.zeros_like(self.qd), np.zeros_like(self.qd)
        )
        q_mat = np.vstack((self.q, stop_q))
        w = np.array([np.inf, 1.0])
        weights = StretchWeights(self.settings.effective_mu(), w)
        beta = self.settings.beta

        def builder(durations):
            return min_stretch_spline(
                q_mat, weights, boundary, KnotSequence(durations, beta)
            )

        plan = _allocate_and_build(builder, np.array([t_b]), self.limits)
        self.diag.replans += 1
        # synthetic stop target: NaN timestamp keeps it out of attainment stats
        targets = [TimedWaypoint(float("nan"), stop_q)]
        self._install(plan, targets, stitch=True)

    def _finish_or_brake(self) -> None:
        if np.max(np.abs(self.qd)) > 1e-9:
            self._brake_to_rest()
        else:
            self.traj = None
            self.pending = []

    def _replan_precise(self) -> None:
        fresh = self.buffer.drain()
        if fresh:
            remaining = self.pending[self.cursor :]
            targets = remaining + [
                TimedWaypoint(w.t, self._clamp_target(w.q)) for w in fresh
            ]
            plan = self._plan_through(targets)
            self._install(plan, targets, stitch=True)
        else:
            self.cursor += 1
            if self.cursor >= len(self.traj.issued_knot_indices):
                self._finish_or_brake()

    def _replan_rapid(self) -> None:
        wp, skipped = self.buffer.pop_latest()
        self.diag.skipped_rapid += skipped
        if wp is None:
            if self.t_now >= self.t_traj + self.traj.total_duration - TICK_EPS:
                self._finish_or_brake()
            return
        self._rapid_plan(wp)

    def _rapid_plan(self, wp: TimedWaypoint) -> None:
        """Replan toward the newest waypoint via the three key points.

        Segment timings: the previous trajectory's unexecuted remainder for
        the blend through its end point, and the pop-to-pop cadence toward
        the new target; the dilation loop enforces limits on top.
        """
        goal = self._clamp_target(wp.q)
        dtf = self.settings.dt_output
        if self.traj is not None:
            q_end = self.traj.attained_waypoints[-1]
            remaining = max(self.t_traj + self.traj.total_duration - self.t_now, 0.0)
        else:
            q_end = self.q
            remaining = 0.0
        gap = None if self._last_pop_ts is None else wp.t - self._last_pop_ts
        self._last_pop_ts = wp.t
        self.rapid_pops.append((wp.t, goal))

        pts = [self.q]
        durs: list[float] = []
        if np.max(np.abs(q_end - self.q)) >= MERGE_TOL:
            pts.append(q_end)
            durs.append(max(remaining, dtf))
        if np.max(np.abs(goal - pts[-1])) >= MERGE_TOL:
            pts.append(goal)
            if gap is not None and gap > 0.0:
                durs.append(max(gap, dtf))
            else:
                durs.append(heuristic_duration(goal - pts[-2], self.limits, dtf))
        if len(pts) == 1:
            # fully converged; plan a stop-hold at the current position
            targets = [TimedWaypoint(wp.t, self.q.copy())]
            durs = [dtf]
        else:
            targets = [TimedWaypoint(wp.t, p) for p in pts[1:]]
        plan = self._plan_through(targets, initial=np.array(durs))
        self._install(plan, targets, stitch=True)


@dataclass
class ServoResult:
    ticks: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    clamped: np.ndarray
    diagnostics: Diagnostics
    stitches: list[StitchRecord]
    attainments: list[tuple[float, float]]
    rapid_pops: list[tuple[float, np.ndarray]]
    trajectories: list[tuple[float, CubicSplineTrajectory]]
    dt_output: float


def run_servo(
    inputs,
    config: RobotConfig,
    settings: ServoSettings,
    *,
    filter_settings: Optional[FilterSettings] = None,
    initial_q=None,
    stop_time: Optional[float] = None,
    record_trajectories: bool = False,
) -> ServoResult:
    """Batch-run the servo loop over a timestamped waypoint stream.

    ``inputs`` is a sequence of ``(t, q)`` pairs (or TimedWaypoints) sorted
    by time; the simulated clock advances with the emitted commands, so two
    runs on identical input produce identical command streams.  When
    ``stop_time`` is given the servo flag drops at that instant: later
    inputs are ignored but already-buffered waypoints still drain.
    """
    stream = [TimedWaypoint(float(t), np.asarray(q, dtype=float)) for t, q in inputs]
    if any(stream[i].t >= stream[i + 1].t for i in range(len(stream) - 1)):
        raise InvalidParameterError("input timestamps must be strictly increasing")
    if stop_time is not None:
        stream = [wp for wp in stream if wp.t < stop_time]
    if initial_q is None:
        if not stream:
            initial_q = np.zeros(config.dof)
        else:
            initial_q = stream[0].q
    engine = ServoEngine(
        config,
        settings,
        initial_q,
        filter_settings=filter_settings,
        record_trajectories=record_trajectories,
    )

    i = 0
    n = len(stream)
    commands: list[Command] = []

    def ingest(until_t: float) -> None:
        nonlocal i
        while i < n and stream[i].t <= until_t + TICK_EPS:
            engine.push_input(stream[i].t, stream[i].q)
            i += 1
        if i >= n:
            # the monitor notices the stream has stopped before the next replan
            engine.request_stop()

    while True:
        if engine.started:
            ingest(engine.t_now)
        if i >= n:
            engine.request_stop()
        if engine.idle:
            if i < n:
                commands.extend(engine.park_until(stream[i].t))
                ingest(engine.t_now if engine.started else stream[i].t)
                continue
            break
        commands.extend(engine.step(ingest))

    ticks = np.array([c.tick for c in commands], dtype=np.int64)
    times = np.array([c.t for c in commands])
    positions = (
        np.vstack([c.q for c in commands])
        if commands
        else np.empty((0, config.dof))
    )
    clamped = np.array([c.clamped for c in commands], dtype=bool)
    return ServoResult(
        ticks,
        times,
        positions,
        clamped,
        engine.diag,
        engine.stitches,
        engine.attainments,
        engine.rapid_pops,
        engine.trajectories,
        settings.dt_output,
    )
