import numpy as np
import pytest

from uttg.errors import (
    InvalidParameterError,
    OutOfLimitsError,
    TimeAllocationError,
)
from uttg.preprocess import FilterSettings, TimedWaypoint
from uttg.servo import (
    JointLimits,
    ServoSettings,
    WaypointBuffer,
    allocate_times,
    execute_trajectory,
    heuristic_duration,
    plan_joint_path,
    run_servo,
    solve_ptp,
)
from uttg.streams import STEP_JUMP_TARGET, standard_stream, step_jump_stream

from conftest import servo_config


def demo_limits() -> JointLimits:
    return JointLimits.from_config(servo_config())


# ------------------------------------------------------------------ buffer


def test_buffer_fifo_and_drain():
    buf = WaypointBuffer(capacity=10)
    for k in range(3):
        assert buf.push(TimedWaypoint(0.1 * k, np.array([float(k)])))
    drained = buf.drain()
    assert [wp.q[0] for wp in drained] == [0.0, 1.0, 2.0]
    assert len(buf) == 0


def test_buffer_rejects_stale_timestamps():
    buf = WaypointBuffer()
    assert buf.push(TimedWaypoint(1.0, np.array([0.0])))
    assert not buf.push(TimedWaypoint(1.0, np.array([1.0])))
    assert not buf.push(TimedWaypoint(0.5, np.array([1.0])))
    assert buf.dropped_stale == 2
    assert len(buf) == 1


def test_buffer_overflow_drops_oldest():
    buf = WaypointBuffer(capacity=3)
    for k in range(5):
        buf.push(TimedWaypoint(float(k), np.array([float(k)])))
    assert buf.dropped_overflow == 2
    assert [wp.q[0] for wp in buf.drain()] == [2.0, 3.0, 4.0]


def test_buffer_pop_latest_skips_older():
    buf = WaypointBuffer()
    for k in range(4):
        buf.push(TimedWaypoint(float(k), np.array([float(k)])))
    wp, skipped = buf.pop_latest()
    assert wp.q[0] == 3.0 and skipped == 3
    assert buf.pop_latest() == (None, 0)


# ------------------------------------------------------- time allocation


def test_zero_displacement_floors_at_dt_output():
    limits = demo_limits()
    q = np.zeros((3, 2))
    durations = allocate_times(q, None, limits, dt_floor=0.005)
    assert np.allclose(durations, 0.005)


def test_timestamps_respected_when_limits_hold():
    limits = demo_limits()
    q = np.array([[0.0, 0.0], [0.01, 0.0], [0.02, 0.0]])
    stamps = [0.0, 0.05, 0.10]
    durations = allocate_times(q, stamps, limits, dt_floor=0.005)
    assert np.allclose(durations, 0.05)


def test_dilation_reaches_compliance():
    limits = demo_limits()
    q = np.array([[0.0, 0.0], [1.5, -1.0]])  # far too fast for 50 ms
    stamps = [0.0, 0.05]
    durations = allocate_times(q, stamps, limits, dt_floor=0.005)
    assert durations[0] > 0.05


def test_dilation_cap_raises():
    limits = JointLimits(
        np.array([[-10.0, 10.0]]), np.array([1e-4]), np.array([1e-4])
    )
    with pytest.raises(TimeAllocationError):
        allocate_times(np.array([[0.0], [5.0]]), [0.0, 0.01], limits, dt_floor=0.005)


# ---------------------------------------------------------------- solve_ptp


def test_ptp_null_displacement_holds():
    limits = demo_limits()
    traj = solve_ptp(np.array([0.2, -0.1]), np.array([0.2, -0.1]), limits)
    assert traj.total_duration == pytest.approx(0.005)
    res = traj.eval(traj.total_duration / 2)
    assert np.max(np.abs(res.position - [0.2, -0.1])) < 1e-12
    assert np.max(np.abs(res.velocity)) < 1e-12


def test_ptp_duration_lower_bound_and_compliance():
    # 1 DoF: 1 rad displacement, v_max 2, a_max 4
    limits = JointLimits(np.array([[-3.0, 3.0]]), np.array([2.0]), np.array([4.0]))
    traj = solve_ptp(np.array([0.0]), np.array([1.0]), limits)
    assert traj.total_duration >= max(1.5 * 1.0 / 2.0, np.sqrt(6.0 * 1.0 / 4.0)) - 1e-12
    ts = np.arange(0.0, traj.total_duration, 0.001)
    _, vel, acc, _ = traj.sample(ts)
    assert np.max(np.abs(vel)) <= 2.0 * (1 + 1e-9)
    assert np.max(np.abs(acc)) <= 4.0 * (1 + 1e-9)
    # rest-to-rest endpoints attained exactly
    assert traj.eval(0.0).position[0] == pytest.approx(0.0, abs=1e-12)
    assert traj.eval(traj.total_duration).position[0] == pytest.approx(1.0, abs=1e-12)


def test_ptp_rejects_out_of_limit_start():
    limits = demo_limits()
    with pytest.raises(OutOfLimitsError):
        solve_ptp(np.array([9.0, 0.0]), np.array([0.0, 0.0]), limits)


def test_ptp_clamps_goal():
    limits = demo_limits()
    traj = solve_ptp(np.array([0.0, 0.0]), np.array([9.0, 0.0]), limits)
    end = traj.eval(traj.total_duration)
    assert end.position[0] == pytest.approx(limits.position[0, 1])


# ----------------------------------------------------------- joint path


def test_plan_joint_path_three_distinct():
    pts = plan_joint_path(np.array([0.0]), np.array([1.0]), np.array([2.0]))
    assert pts.shape == (3, 1)
    assert pts[:, 0].tolist() == [0.0, 1.0, 2.0]


def test_plan_joint_path_merges():
    a = np.array([0.0, 0.0])
    assert plan_joint_path(a, np.array([1.0, 0.0]), np.array([1.0, 0.0])).shape == (2, 2)
    assert plan_joint_path(a, a, a).shape == (1, 2)
    assert plan_joint_path(a, a + 1e-9, a + 2e-9).shape == (1, 2)


# ----------------------------------------------------- execute_trajectory


def test_execute_trajectory_command_count(demo_config):
    limits = JointLimits.from_config(demo_config)
    traj = solve_ptp(np.zeros(2), np.array([0.5, -0.3]), limits)
    settings = ServoSettings(dt_output=0.005)
    cmds = execute_trajectory(traj, 0.05, settings)
    assert len(cmds) == 10
    for cmd in cmds:
        expect = traj.eval(cmd.t).position
        assert np.max(np.abs(cmd.q - expect)) < 1e-12


# ------------------------------------------------------------- run_servo


def test_empty_stream_zero_commands(demo_config):
    result = run_servo([], demo_config, ServoSettings())
    assert len(result.times) == 0


@pytest.mark.parametrize("mode", ["precise", "rapid"])
def test_standard_stream_bridges_20_to_200_hz(demo_config, mode):
    result = run_servo(standard_stream(), demo_config, ServoSettings(mode=mode))
    assert abs(len(result.times) - 1000) <= 1
    spacing = np.diff(result.times)
    assert np.max(np.abs(spacing - 0.005)) < 1e-12
    assert np.array_equal(np.diff(result.ticks), np.ones(len(result.ticks) - 1, dtype=np.int64))


@pytest.mark.parametrize("mode", ["precise", "rapid"])
def test_runs_are_bit_identical(demo_config, mode):
    a = run_servo(standard_stream(), demo_config, ServoSettings(mode=mode))
    b = run_servo(standard_stream(), demo_config, ServoSettings(mode=mode))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.positions, b.positions)


@pytest.mark.parametrize("mode", ["precise", "rapid"])
def test_stitch_continuity_and_limits(demo_config, mode):
    result = run_servo(standard_stream(), demo_config, ServoSettings(mode=mode))
    d = result.diagnostics
    assert d.max_stitch_pos < 1e-8
    assert d.max_stitch_vel < 1e-8
    assert d.max_stitch_acc < 1e-8
    lo = demo_config.position_limits[:, 0]
    hi = demo_config.position_limits[:, 1]
    assert np.all(result.positions >= lo - 1e-12)
    assert np.all(result.positions <= hi + 1e-12)
    assert np.all(d.max_abs_velocity <= demo_config.velocity_limits * (1 + 1e-9))
    assert np.all(d.max_abs_acceleration <= demo_config.acceleration_limits * (1 + 1e-9))


def test_precise_mode_attains_every_waypoint(demo_config):
    result = run_servo(standard_stream(), demo_config, ServoSettings(mode="precise"))
    assert len(result.attainments) == len(standard_stream())
    worst = max(err for _, err in result.attainments)
    assert worst < 1e-9


def test_rapid_mode_skips_to_newest_on_bursty_stream(demo_config):
    # 60 Hz input vs 20 Hz servo slices: several waypoints per pop
    ts = np.arange(0, 300) / 60.0
    stream = [
        (float(t), np.array([0.5 * np.sin(2 * np.pi * 0.4 * t), 0.2 * np.cos(t)]))
        for t in ts
    ]
    result = run_servo(stream, demo_config, ServoSettings(mode="rapid"))
    d = result.diagnostics
    assert d.skipped_rapid > 0
    sim_pops = [t for t, _ in result.rapid_pops]
    assert sim_pops == sorted(sim_pops)
    # popped + skipped + the initial point-to-point pop accounts for
    # every forwarded waypoint
    count = len(sim_pops) + d.skipped_rapid + d.ptp_starts
    assert count == d.waypoints_forwarded


def test_rapid_terminal_knot_is_newest_waypoint(demo_config):
    # identity filter so buffered waypoints equal the raw stream values
    result = run_servo(
        step_jump_stream(),
        demo_config,
        ServoSettings(mode="rapid"),
        filter_settings=FilterSettings(enabled=False),
        record_trajectories=True,
    )
    stream = {t: q for t, q in step_jump_stream()}
    assert result.rapid_pops
    for t_pop, goal in result.rapid_pops:
        assert t_pop in stream
        assert np.max(np.abs(goal - stream[t_pop])) < 1e-12


def test_rapid_converges_and_holds_on_repeated_target(demo_config):
    target = np.array([0.4, -0.2])
    stream = [(0.05 * k, target.copy()) for k in range(1, 60)]
    result = run_servo(
        stream, demo_config, ServoSettings(mode="rapid"), initial_q=np.zeros(2)
    )
    assert np.max(np.abs(result.positions[-1] - target)) < 1e-6
    tail = result.positions[-10:]
    vel = np.diff(tail, axis=0) / 0.005
    assert np.max(np.abs(vel)) < 1e-6


def test_rapid_is_faster_to_jumped_target(demo_config):
    def settle(res, target, tol=0.01):
        err = np.max(np.abs(res.positions - target), axis=1)
        bad = np.where(err > tol)[0]
        assert bad[-1] + 1 < len(res.times), "never settled"
        return res.times[bad[-1] + 1]

    precise = run_servo(step_jump_stream(), demo_config, ServoSettings(mode="precise"))
    rapid = run_servo(step_jump_stream(), demo_config, ServoSettings(mode="rapid"))
    assert settle(rapid, STEP_JUMP_TARGET) < settle(precise, STEP_JUMP_TARGET)


def test_stop_time_drains_remaining_buffer(demo_config):
    stream = standard_stream()
    result = run_servo(
        stream, demo_config, ServoSettings(mode="precise"), stop_time=2.0
    )
    fed = [t for t, _ in stream if t < 2.0]
    assert len(result.attainments) == len(fed)  # everything buffered got visited
    assert result.times[-1] < 3.0


def test_starvation_gap_brakes_and_resumes(demo_config):
    stream = [(t, q) for t, q in standard_stream() if not 1.0 < t < 2.0]
    result = run_servo(stream, demo_config, ServoSettings(mode="precise"))
    d = result.diagnostics
    assert d.max_stitch_vel < 1e-8  # braking replans stay continuous
    assert d.holds_emitted > 0
    # commands keep tick regularity across the hole
    assert np.max(np.abs(np.diff(result.times) - 0.005)) < 1e-12


def test_settings_validation():
    with pytest.raises(InvalidParameterError):
        ServoSettings(mode="warp")
    with pytest.raises(InvalidParameterError):
        ServoSettings(dt_output=0.0)
    with pytest.raises(InvalidParameterError):
        ServoSettings(dt_servo=0.001, dt_output=0.005)
    with pytest.raises(InvalidParameterError):
        ServoSettings(mu=0.0)
    assert ServoSettings(mode="precise").effective_mu() == 0.999
    assert ServoSettings(mode="rapid").effective_mu() == 0.9


def test_heuristic_duration_formula():
    limits = JointLimits(np.array([[-3, 3]]), np.array([2.0]), np.array([4.0]))
    t = heuristic_duration(np.array([1.0]), limits, 0.005)
    assert t == pytest.approx(max(1.5 / 2.0, np.sqrt(6.0 / 4.0)))
