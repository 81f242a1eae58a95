"""Command-line surface: config generation, batch servoing, comparison
runs, and the live bridge service.

Exit codes: 0 success, 1 unexpected error, 2 robot-description problems
(parse/validation/chain resolution), 3 DoF mismatch between input data and
config.  Set ``UTTG_LOG`` to a logging level name for verbose output.
"""

import argparse
import logging
import os
import sys

import numpy as np

from .errors import InputFormatError, UrdfError, UttgError
from .harness import (
    compare_baseline,
    read_command_csv,
    write_command_csv,
    write_report_json,
)
from .preprocess import FilterSettings
from .servo import ServoSettings, run_servo
from .urdf import RobotConfig, generate_config, parse_urdf

logger = logging.getLogger("uttg")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_URDF = 2
EXIT_DOF = 3


def _setup_logging() -> None:
    level = os.environ.get("UTTG_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["precise", "rapid"], default="precise")
    p.add_argument("--mu", type=float, default=None, help="fit/smoothness weight; defaults per mode")
    p.add_argument("--beta", type=float, default=0.5, help="assistant-point split ratio")
    p.add_argument("--output-rate", type=float, default=200.0, help="command rate in Hz")
    p.add_argument("--servo-dt", type=float, default=0.05, help="rapid-mode executed slice (s)")
    p.add_argument("--filter-cutoff", type=float, default=5.0, help="input low-pass cutoff (Hz)")
    p.add_argument("--deadband", type=float, default=0.0, help="minimum forwarded change (rad)")


def _engine_settings(args) -> tuple[ServoSettings, FilterSettings]:
    settings = ServoSettings(
        mode=args.mode,
        mu=args.mu,
        beta=args.beta,
        dt_output=1.0 / args.output_rate,
        dt_servo=args.servo_dt,
    )
    filt = FilterSettings(cutoff_hz=args.filter_cutoff, deadband=args.deadband)
    return settings, filt


def cmd_gen_config(args) -> int:
    try:
        with open(args.urdf) as fh:
            model = parse_urdf(fh.read())
        config = generate_config(model, args.base, args.tip, args.accel_scale)
    except UrdfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_URDF
    config.save(args.output)
    print(f"wrote {args.output}: {config.robot_name}, dof={config.dof}")
    for i, name in enumerate(config.joint_names):
        lo, hi = config.position_limits[i]
        print(
            f"  {name}: pos [{lo:.4g}, {hi:.4g}] rad, "
            f"vel {config.velocity_limits[i]:.4g} rad/s, "
            f"acc {config.acceleration_limits[i]:.4g} rad/s^2"
        )
    return EXIT_OK


def cmd_servo(args) -> int:
    config = RobotConfig.load(args.config)
    times, positions = read_command_csv(args.input)
    if len(times) == 0:
        write_command_csv(args.output, np.empty(0), np.empty((0, config.dof)))
        print("empty input; wrote empty output")
        return EXIT_OK
    if positions.shape[1] != config.dof:
        print(
            f"error: input has {positions.shape[1]} joints, config has {config.dof}",
            file=sys.stderr,
        )
        return EXIT_DOF
    settings, filt = _engine_settings(args)
    result = run_servo(
        list(zip(times, positions)), config, settings, filter_settings=filt
    )
    write_command_csv(args.output, result.times, result.positions)
    d = result.diagnostics
    print(f"wrote {args.output}: {len(result.times)} commands at {args.output_rate:g} Hz")
    print(f"  replans: {d.replans}  (ptp starts: {d.ptp_starts})")
    if d.max_abs_velocity is not None:
        print(f"  max |v|: {np.array2string(d.max_abs_velocity, precision=3)} rad/s")
        print(f"  max |a|: {np.array2string(d.max_abs_acceleration, precision=3)} rad/s^2")
    print(
        f"  waypoints: {d.waypoints_in} in, {d.waypoints_forwarded} forwarded, "
        f"{d.suppressed} suppressed, {d.dropped_stale} stale-dropped, "
        f"{d.skipped_rapid} skipped"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    config = RobotConfig.load(args.config)
    times, positions = read_command_csv(args.input)
    if len(times) and positions.shape[1] != config.dof:
        print("error: DoF mismatch", file=sys.stderr)
        return EXIT_DOF
    settings, filt = _engine_settings(args)
    report = compare_baseline(
        list(zip(times, positions)), config, settings, filter_settings=filt
    )
    write_report_json(args.report, report)
    red = report["reduction_percent"]
    red_text = "n/a (degenerate stream)" if red is None else f"{red:.1f}%"
    print(f"wrote {args.report}: mean-|accel| reduction {red_text}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve_forever  # lazy: pulls in websockets

    config = RobotConfig.load(args.config)
    settings, filt = _engine_settings(args)
    print(f"serving {config.robot_name} on ws://{args.host}:{args.port} (Ctrl-C stops)")
    serve_forever(
        config,
        settings,
        host=args.host,
        port=args.port,
        filter_settings=filt,
        ui_rate_hz=args.ui_rate,
        static_dir=args.static,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uttg",
        description="Online trajectory generation bridge for teleoperation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-config", help="generate engine config from URDF")
    g.add_argument("urdf")
    g.add_argument("--base", required=True, help="chain base link")
    g.add_argument("--tip", required=True, help="chain tip link")
    g.add_argument("-o", "--output", required=True)
    g.add_argument(
        "--accel-scale",
        type=float,
        default=1.0,
        help="acceleration limit = scale * velocity_limit / 0.1 s",
    )
    g.set_defaults(func=cmd_gen_config)

    s = sub.add_parser("servo", help="batch-run the servo loop over a CSV stream")
    s.add_argument("--config", required=True)
    s.add_argument("--input", required=True, help="CSV with columns t,q_0..q_{n-1}")
    s.add_argument("--output", required=True)
    _add_engine_flags(s)
    s.set_defaults(func=cmd_servo)

    c = sub.add_parser("compare", help="engine vs zero-order-hold smoothness report")
    c.add_argument("--config", required=True)
    c.add_argument("--input", required=True)
    c.add_argument("--report", required=True)
    _add_engine_flags(c)
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("serve", help="live WebSocket teleoperation bridge")
    v.add_argument("--config", required=True)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8765)
    v.add_argument("--ui-rate", type=float, default=60.0, help="state broadcast rate (Hz)")
    v.add_argument("--static", default=None, help="directory of console assets to serve")
    _add_engine_flags(v)
    v.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UrdfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_URDF
    except (InputFormatError, UttgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
