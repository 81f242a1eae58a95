import json

import numpy as np
import pytest

from uttg.errors import InputFormatError
from uttg.harness import (
    ActuatorModel,
    Trace,
    compare_baseline,
    mav,
    read_command_csv,
    simulate,
    tracking_rmse,
    write_command_csv,
    write_report_json,
    zero_order_hold,
)
from uttg.servo import ServoSettings
from uttg.streams import standard_stream


def test_perfect_actuator_echoes_commands(rng):
    times = np.arange(100) * 0.005
    pos = rng.normal(size=(100, 2))
    trace = simulate(times, pos, ActuatorModel(mode="perfect"))
    assert np.array_equal(trace.positions, pos)
    assert np.array_equal(trace.times, times)


def test_lag_step_response_matches_closed_form():
    tau = 0.08
    times = np.arange(0, 401) * 0.005
    cmds = np.full((401, 1), 0.7)
    trace = simulate(times, cmds, ActuatorModel("first_order_lag", tau, 200.0), x0=np.zeros(1))
    expected = 0.7 * (1.0 - np.exp(-trace.times / tau))
    assert np.max(np.abs(trace.positions[:, 0] - expected)) < 1e-6


def test_lag_never_overshoots():
    times = np.arange(0, 201) * 0.005
    cmds = np.ones((201, 1))
    trace = simulate(times, cmds, ActuatorModel("first_order_lag", 0.05, 200.0), x0=np.zeros(1))
    assert np.all(trace.positions <= 1.0 + 1e-12)
    assert np.all(np.diff(trace.positions[:, 0]) >= -1e-12)


def test_unordered_commands_rejected():
    with pytest.raises(InputFormatError):
        simulate([0.0, 0.2, 0.1], np.zeros((3, 1)), ActuatorModel())


def test_mav_of_constant_velocity_ramp():
    times = np.arange(50) * 0.01
    pos = np.outer(times, [1.3])
    trace = Trace.from_positions(times, pos)
    assert mav(trace)[0] < 1e-9


def test_mav_definition_on_given_samples():
    trace = Trace(
        times=np.array([0.0, 1.0, 2.0]),
        positions=np.zeros((3, 1)),
        velocities=np.zeros((3, 1)),
        accelerations=np.array([[1.0], [-1.0], [2.0]]),
    )
    assert mav(trace)[0] == pytest.approx(4.0 / 3.0)


def test_mav_sinusoid_matches_analytic_mean():
    # theta(t) = sin(2 pi t) at 200 Hz for 5 s: mean |a| = (2 pi)^2 * 2/pi
    times = np.arange(0, 1001) * 0.005
    pos = np.sin(2 * np.pi * times)[:, None]
    trace = Trace.from_positions(times, pos)
    analytic = (2 * np.pi) ** 2 * 2 / np.pi
    assert mav(trace)[0] == pytest.approx(analytic, rel=0.02)


def test_mav_requires_three_samples():
    with pytest.raises(InputFormatError):
        Trace.from_positions(np.array([0.0, 1.0]), np.zeros((2, 1)))


def test_zero_order_hold_repeats_latest_target():
    stream = [(0.0, np.array([0.0])), (0.1, np.array([1.0]))]
    out = zero_order_hold(np.array([0.0, 0.05, 0.1, 0.15]), stream)
    assert out[:, 0].tolist() == [0.0, 0.0, 1.0, 1.0]


def test_compare_constant_stream_is_degenerate(demo_config):
    stream = [(0.05 * k, np.array([0.3, -0.2])) for k in range(40)]
    report = compare_baseline(stream, demo_config, ServoSettings())
    assert report["reduction_percent"] is None


def test_compare_standard_stream_reduction(demo_config):
    report = compare_baseline(standard_stream(), demo_config, ServoSettings())
    assert report["reduction_percent"] >= 80.0
    for a, b in zip(report["std_abs_accel_uttg"], report["std_abs_accel_hold"]):
        assert a < b
    assert len(report["mav_uttg"]) == demo_config.dof
    assert all(r >= 0 for r in report["tracking_rmse"])


def test_report_deterministic(demo_config):
    a = compare_baseline(standard_stream(), demo_config, ServoSettings())
    b = compare_baseline(standard_stream(), demo_config, ServoSettings())
    assert a == b


def test_command_csv_round_trip(tmp_path, rng):
    times = np.arange(20) * 0.005
    pos = rng.normal(size=(20, 3))
    path = tmp_path / "cmds.csv"
    write_command_csv(path, times, pos)
    t2, p2 = read_command_csv(path)
    # 9-significant-digit round trip: re-serializing is bit-identical
    path2 = tmp_path / "again.csv"
    write_command_csv(path2, t2, p2)
    assert path.read_text() == path2.read_text()
    assert np.max(np.abs(p2 - pos)) < 1e-8


def test_csv_header_validation(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,q0\n0,1\n")
    with pytest.raises(InputFormatError):
        read_command_csv(bad)


def test_report_json_schema(tmp_path, demo_config):
    report = compare_baseline(standard_stream(), demo_config, ServoSettings())
    path = tmp_path / "report.json"
    write_report_json(path, report)
    loaded = json.loads(path.read_text())
    for key in (
        "mav_uttg",
        "mav_hold",
        "reduction_percent",
        "std_abs_accel_uttg",
        "std_abs_accel_hold",
        "tracking_rmse",
    ):
        assert key in loaded


def test_tracking_rmse_zero_for_perfect_tracking():
    stream = [(float(k), np.array([float(k)])) for k in range(5)]
    times = np.arange(0, 4.1, 0.5)
    trace = Trace.from_positions(times, times[:, None])
    assert tracking_rmse(trace, stream)[0] < 1e-12
