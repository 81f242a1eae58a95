import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uttg.errors import InvalidParameterError, StaleInputError
from uttg.preprocess import FilterSettings, TimedWaypoint, WaypointFilter, filter_waypoint


def run_stream(settings, samples):
    filt = WaypointFilter(settings)
    out = []
    for t, q in samples:
        res = filt.process(TimedWaypoint(t, np.atleast_1d(np.asarray(q, float))))
        if res is not None:
            out.append(res)
    return filt, out


def test_first_sample_passes_through_unchanged():
    _, out = run_stream(FilterSettings(cutoff_hz=1.0), [(0.0, [0.35, -0.2])])
    assert len(out) == 1
    assert np.array_equal(out[0].q, [0.35, -0.2])
    assert out[0].t == 0.0


def test_constant_stream_converges_to_constant():
    samples = [(k * 0.05, [1.0]) for k in range(200)]
    _, out = run_stream(FilterSettings(cutoff_hz=2.0), samples)
    assert abs(out[-1].q[0] - 1.0) < 1e-12  # unit DC gain
    assert len(out) == len(samples)


def test_sinusoid_attenuation_at_8hz():
    # 20 Hz stream of a 1 rad, 8 Hz sinusoid through a 2 Hz cutoff
    ts = np.arange(0, 400) * 0.05
    samples = [(t, [np.sin(2 * np.pi * 8.0 * t)]) for t in ts]
    _, out = run_stream(FilterSettings(cutoff_hz=2.0), samples)
    steady = np.array([wp.q[0] for wp in out[100:]])
    assert np.max(np.abs(steady)) < 0.45


def test_non_monotonic_timestamp_raises():
    filt = WaypointFilter(FilterSettings())
    filt.process(TimedWaypoint(1.0, np.array([0.0])))
    with pytest.raises(StaleInputError):
        filt.process(TimedWaypoint(1.0, np.array([0.0])))
    with pytest.raises(StaleInputError):
        filt.process(TimedWaypoint(0.5, np.array([0.0])))


def test_deadband_suppresses_small_changes():
    settings = FilterSettings(cutoff_hz=1e6, deadband=0.01)
    samples = [(k * 0.05, [0.001 * k]) for k in range(10)]
    filt, out = run_stream(settings, samples)
    # 1 mrad steps stay under the 10 mrad deadband for a while
    assert len(out) < len(samples)
    assert filt.suppressed == len(samples) - len(out)
    # timestamps pass through and stay strictly increasing
    ts = [wp.t for wp in out]
    assert all(a < b for a, b in zip(ts, ts[1:]))


def test_degenerate_settings_are_identity():
    samples = [(k * 0.05, [np.sin(k)]) for k in range(50)]
    _, out = run_stream(FilterSettings(cutoff_hz=np.inf, deadband=0.0), samples)
    assert len(out) == len(samples)
    for (t, q), wp in zip(samples, out):
        assert abs(wp.q[0] - q[0]) < 1e-12


def test_disabled_filter_passes_values():
    samples = [(k * 0.05, [np.cos(k)]) for k in range(20)]
    _, out = run_stream(FilterSettings(cutoff_hz=2.0, enabled=False), samples)
    for (t, q), wp in zip(samples, out):
        assert wp.q[0] == q[0]


@given(
    values=st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=60),
    cutoff=st.floats(0.2, 50.0),
)
@settings(max_examples=50, deadline=None)
def test_output_bounded_by_input_envelope(values, cutoff):
    filt = WaypointFilter(FilterSettings(cutoff_hz=cutoff))
    lo, hi = np.inf, -np.inf
    for k, v in enumerate(values):
        lo, hi = min(lo, v), max(hi, v)
        out = filt.process(TimedWaypoint(k * 0.05, np.array([v])))
        assert out is not None
        assert lo - 1e-12 <= out.q[0] <= hi + 1e-12


def test_functional_wrapper():
    filt = WaypointFilter(FilterSettings())
    state, out = filter_waypoint(filt, TimedWaypoint(0.0, np.array([1.0])))
    assert state is filt
    assert out is not None


def test_settings_validation():
    with pytest.raises(InvalidParameterError):
        FilterSettings(cutoff_hz=0.0)
    with pytest.raises(InvalidParameterError):
        FilterSettings(deadband=-1e-3)
