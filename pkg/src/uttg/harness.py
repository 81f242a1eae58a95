"""Simulated actuator and smoothness metrics laboratory.

Feeds command streams through an actuator model, derives velocity and
acceleration traces by central finite differences of the positions (the
metric must reflect what an actuator would feel, not what the planner
reports), computes the mean-absolute-acceleration smoothness metric, and
runs paired engine-vs-zero-order-hold comparisons.
"""

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputFormatError, InvalidParameterError
from .preprocess import FilterSettings
from .servo import ServoSettings, run_servo
from .urdf import RobotConfig


@dataclass(frozen=True)
class ActuatorModel:
    """Perfect echo or a first-order lag sampled at ``rate_hz``."""

    mode: str = "perfect"
    time_constant: float = 0.05
    rate_hz: float = 200.0

    def __post_init__(self):
        if self.mode not in ("perfect", "first_order_lag"):
            raise InvalidParameterError(f"unknown actuator mode '{self.mode}'")
        if self.mode == "first_order_lag" and self.time_constant <= 0.0:
            raise InvalidParameterError("time_constant must be > 0 in lag mode")
        if self.rate_hz <= 0.0:
            raise InvalidParameterError("rate_hz must be > 0")


@dataclass
class Trace:
    """Uniformly sampled positions with finite-difference derivatives."""

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    @classmethod
    def from_positions(cls, times: np.ndarray, positions: np.ndarray) -> "Trace":
        times = np.asarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, None]
        if len(times) != positions.shape[0]:
            raise InputFormatError("times and positions must have equal length")
        if len(times) < 3:
            raise InputFormatError("trace needs at least 3 samples")
        steps = np.diff(times)
        if np.any(steps <= 0) or np.max(steps) - np.min(steps) > 1e-6:
            raise InputFormatError("trace requires a uniform, increasing time grid")
        dt = float(np.mean(steps))
        vel = np.gradient(positions, dt, axis=0)
        acc = np.empty_like(positions)
        acc[1:-1] = (positions[2:] - 2.0 * positions[1:-1] + positions[:-2]) / dt**2
        acc[0] = acc[1]
        acc[-1] = acc[-2]
        return cls(times, positions, vel, acc)


def simulate(command_times, command_positions, model: ActuatorModel, x0=None) -> Trace:
    """Run a command stream through the actuator model.

    Perfect mode echoes the commands on their own grid.  Lag mode holds
    each command (ZOH) and integrates ``dx/dt = (u - x) / tau`` exactly on
    the ``rate_hz`` grid, starting from ``x0`` (default: first command).
    """
    times = np.asarray(command_times, dtype=float)
    pos = np.asarray(command_positions, dtype=float)
    if pos.ndim == 1:
        pos = pos[:, None]
    if len(times) < 3:
        raise InputFormatError("need at least 3 commands")
    if np.any(np.diff(times) <= 0):
        raise InputFormatError("commands must be strictly time-ordered")
    if model.mode == "perfect":
        return Trace.from_positions(times, pos)

    dt = 1.0 / model.rate_hz
    grid = times[0] + dt * np.arange(int(np.floor((times[-1] - times[0]) / dt)) + 1)
    decay = math.exp(-dt / model.time_constant)
    x = pos[0].copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    out = np.empty((len(grid), pos.shape[1]))
    out[0] = x
    for k in range(1, len(grid)):
        # input held at the latest command issued before the step
        j = np.searchsorted(times, grid[k - 1], side="right") - 1
        u = pos[max(j, 0)]
        x = u + (x - u) * decay
        out[k] = x
    return Trace.from_positions(grid, out)


def mav(trace: Trace) -> np.ndarray:
    """Per-joint mean absolute acceleration over the trace."""
    if trace.positions.shape[0] < 3:
        raise InputFormatError("trace needs at least 3 samples")
    return np.mean(np.abs(trace.accelerations), axis=0)


def zero_order_hold(times, input_stream) -> np.ndarray:
    """Latest-issued-target baseline sampled on ``times`` (no interpolation)."""
    in_t = np.array([t for t, _ in input_stream])
    in_q = np.vstack([q for _, q in input_stream])
    idx = np.searchsorted(in_t, np.asarray(times) + 1e-12, side="right") - 1
    np.clip(idx, 0, len(in_t) - 1, out=idx)
    return in_q[idx]


def tracking_rmse(trace: Trace, input_stream) -> np.ndarray:
    """Per-joint RMSE against the linearly interpolated issued targets."""
    in_t = np.array([t for t, _ in input_stream])
    in_q = np.vstack([q for _, q in input_stream])
    ref = np.empty_like(trace.positions)
    for j in range(in_q.shape[1]):
        ref[:, j] = np.interp(trace.times, in_t, in_q[:, j])
    return np.sqrt(np.mean((trace.positions - ref) ** 2, axis=0))


def compare_baseline(
    inputs,
    config: RobotConfig,
    settings: ServoSettings,
    *,
    actuator: Optional[ActuatorModel] = None,
    filter_settings: Optional[FilterSettings] = None,
) -> dict:
    """Engine vs zero-order-hold on identical actuator models.

    The baseline repeats each issued target at the engine's output ticks.
    ``reduction_percent`` averages the per-joint MAV reductions; it is
    ``None`` when the hold baseline itself produces (numerically) zero
    acceleration, e.g. for a constant stream.
    """
    actuator = actuator or ActuatorModel()
    stream = [(float(t), np.asarray(q, dtype=float)) for t, q in inputs]
    result = run_servo(
        stream, config, settings, filter_settings=filter_settings
    )
    if len(result.times) < 3:
        raise InputFormatError("engine produced too few commands to compare")
    engine_trace = simulate(result.times, result.positions, actuator)
    hold_positions = zero_order_hold(result.times, stream)
    hold_trace = simulate(result.times, hold_positions, actuator)

    mav_engine = mav(engine_trace)
    mav_hold = mav(hold_trace)
    scale = max(float(np.max(np.abs(hold_trace.positions))), 1.0)
    degenerate = np.all(mav_hold < 1e-9 * scale)
    if degenerate:
        reduction = None
        per_joint = [None] * config.dof
    else:
        ratio = mav_engine / np.where(mav_hold > 0, mav_hold, np.inf)
        per_joint = (100.0 * (1.0 - ratio)).tolist()
        reduction = float(np.mean(100.0 * (1.0 - ratio)))

    return {
        "mav_uttg": mav_engine.tolist(),
        "mav_hold": mav_hold.tolist(),
        "reduction_percent": reduction,
        "reduction_per_joint": per_joint,
        "std_abs_accel_uttg": np.std(
            np.abs(engine_trace.accelerations), axis=0
        ).tolist(),
        "std_abs_accel_hold": np.std(np.abs(hold_trace.accelerations), axis=0).tolist(),
        "tracking_rmse": tracking_rmse(engine_trace, stream).tolist(),
        "command_count": int(len(result.times)),
        "replans": result.diagnostics.replans,
    }


# ---------------------------------------------------------------------- I/O


def write_command_csv(path, times, positions) -> None:
    """Columns ``t, q_0..q_{n-1}``; values at 9 significant digits."""
    positions = np.asarray(positions)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"q_{j}" for j in range(positions.shape[1])])
        for t, row in zip(times, positions):
            writer.writerow([f"{t:.9g}"] + [f"{v:.9g}" for v in row])


def read_command_csv(path):
    """Returns (times, positions); validates the documented header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return np.empty(0), np.empty((0, 0))
        if not header or header[0] != "t" or any(
            h != f"q_{j}" for j, h in enumerate(header[1:])
        ):
            raise InputFormatError(f"bad CSV header: {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        return np.empty(0), np.empty((0, len(header) - 1))
    data = np.array(rows)
    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise InputFormatError("CSV rows must be sorted by time")
    return times, data[:, 1:]


def write_report_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def trace_to_csv(path, trace: Trace) -> None:
    n = trace.positions.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t"]
        for prefix in ("q", "qd", "qdd"):
            header += [f"{prefix}_{j}" for j in range(n)]
        writer.writerow(header)
        for i, t in enumerate(trace.times):
            row = [f"{t:.9g}"]
            for arr in (trace.positions, trace.velocities, trace.accelerations):
                row += [f"{v:.9g}" for v in arr[i]]
            writer.writerow(row)
