"""uttg: online trajectory generation for teleoperation.

Turns low-frequency, noisy waypoint streams into smooth, limit-respecting,
high-frequency joint position commands, with robot configuration extracted
from URDF and operator-selectable precise/rapid servo modes.
"""

from .errors import (
    ChainResolutionError,
    InputFormatError,
    InvalidDurationError,
    InvalidParameterError,
    OutOfLimitsError,
    SingularSystemError,
    StaleInputError,
    TimeAllocationError,
    UrdfError,
    UrdfParseError,
    UrdfTopologyError,
    UrdfValidationError,
    UttgError,
)
from .harness import ActuatorModel, Trace, compare_baseline, mav, simulate
from .kinematics import IkSettings, Pose, forward_kinematics, ik_solve, jacobian
from .preprocess import FilterSettings, TimedWaypoint, WaypointFilter, filter_waypoint
from .servo import (
    Command,
    JointLimits,
    ServoEngine,
    ServoSettings,
    ServoState,
    WaypointBuffer,
    allocate_times,
    execute_trajectory,
    plan_joint_path,
    run_servo,
    solve_ptp,
)
from .spline import (
    BandMatrix,
    BoundaryState,
    CubicSplineTrajectory,
    KnotSequence,
    StretchWeights,
    assemble_A,
    assemble_Abar,
    assemble_C,
    build_time_vector,
    eval_trajectory,
    interpolating_spline,
    min_stretch_spline,
    solve_banded,
    static_min_stretch,
    stretch_energy,
)
from .urdf import RobotConfig, RobotModel, generate_config, parse_urdf, serialize_urdf

__version__ = "0.1.0"

__all__ = [
    "ActuatorModel",
    "BandMatrix",
    "BoundaryState",
    "ChainResolutionError",
    "Command",
    "CubicSplineTrajectory",
    "FilterSettings",
    "IkSettings",
    "InputFormatError",
    "InvalidDurationError",
    "InvalidParameterError",
    "JointLimits",
    "KnotSequence",
    "OutOfLimitsError",
    "Pose",
    "RobotConfig",
    "RobotModel",
    "ServoEngine",
    "ServoSettings",
    "ServoState",
    "SingularSystemError",
    "StaleInputError",
    "StretchWeights",
    "TimeAllocationError",
    "Trace",
    "TimedWaypoint",
    "UrdfError",
    "UrdfParseError",
    "UrdfTopologyError",
    "UrdfValidationError",
    "UttgError",
    "WaypointBuffer",
    "WaypointFilter",
    "allocate_times",
    "assemble_A",
    "assemble_Abar",
    "assemble_C",
    "build_time_vector",
    "compare_baseline",
    "eval_trajectory",
    "execute_trajectory",
    "filter_waypoint",
    "forward_kinematics",
    "generate_config",
    "ik_solve",
    "interpolating_spline",
    "jacobian",
    "mav",
    "min_stretch_spline",
    "parse_urdf",
    "plan_joint_path",
    "run_servo",
    "serialize_urdf",
    "simulate",
    "solve_banded",
    "solve_ptp",
    "static_min_stretch",
    "stretch_energy",
]
