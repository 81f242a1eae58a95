"""Input conditioning: low-pass smoothing and deadband suppression.

Raw operator samples pass through a first-order exponential low-pass (unit
DC gain, O(1) state) before entering the servo buffer; changes smaller
than the deadband are suppressed *after* smoothing so tremor cannot defeat
the deadband.  One filter instance owns one input stream.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidParameterError, StaleInputError


class TimedWaypoint(NamedTuple):
    """A joint-space target with its source timestamp (seconds)."""

    t: float
    q: np.ndarray


@dataclass(frozen=True)
class FilterSettings:
    cutoff_hz: float = 5.0
    deadband: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not self.cutoff_hz > 0.0:
            raise InvalidParameterError(f"cutoff_hz must be > 0, got {self.cutoff_hz}")
        if self.deadband < 0.0:
            raise InvalidParameterError(f"deadband must be >= 0, got {self.deadband}")


class WaypointFilter:
    """Stateful per-stream filter; initializes at the first observation.

    ``process`` returns the forwarded waypoint or ``None`` when the sample
    was suppressed by the deadband.  Non-monotonic timestamps raise
    :class:`StaleInputError`; callers typically count and drop them.
    """

    def __init__(self, settings: FilterSettings):
        self.settings = settings
        self._t_last: Optional[float] = None
        self._y: Optional[np.ndarray] = None
        self._forwarded: Optional[np.ndarray] = None
        self.suppressed = 0

    def process(self, raw: TimedWaypoint) -> Optional[TimedWaypoint]:
        t = float(raw.t)
        q = np.asarray(raw.q, dtype=float)
        if self._t_last is not None and t <= self._t_last:
            raise StaleInputError(
                f"timestamp {t} not after previous sample {self._t_last}"
            )
        if self._y is None:
            self._y = q.copy()
        elif not self.settings.enabled:
            self._y = q.copy()
        else:
            dt = t - self._t_last
            rc = 1.0 / (2.0 * math.pi * self.settings.cutoff_hz)
            alpha = dt / (dt + rc)
            self._y = self._y + alpha * (q - self._y)
        self._t_last = t

        if self._forwarded is not None and self.settings.deadband > 0.0:
            if np.max(np.abs(self._y - self._forwarded)) < self.settings.deadband:
                self.suppressed += 1
                return None
        self._forwarded = self._y.copy()
        return TimedWaypoint(t, self._y.copy())


def filter_waypoint(
    state: WaypointFilter, raw: TimedWaypoint
) -> tuple[WaypointFilter, Optional[TimedWaypoint]]:
    """Functional wrapper around :meth:`WaypointFilter.process`."""
    return state, state.process(raw)
