"""Forward kinematics, geometric Jacobian, and damped-least-squares IK.

Pose-input streams are converted to joint waypoints here before any
filtering, so the preprocess stage always acts in joint space.  IK failure
is a value (``None``), not a fault: a live stream holds its previous
target and keeps going.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .urdf import RobotConfig


def rpy_to_matrix(rpy) -> np.ndarray:
    """URDF fixed-axis convention: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    r, p, y = rpy
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    )


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) from a rotation matrix."""
    tr = np.trace(r)
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    else:
        i = int(np.argmax(np.diag(r)))
        if i == 0:
            s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
            w = (r[2, 1] - r[1, 2]) / s
            x = 0.25 * s
            y = (r[0, 1] + r[1, 0]) / s
            z = (r[0, 2] + r[2, 0]) / s
        elif i == 1:
            s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
            w = (r[0, 2] - r[2, 0]) / s
            x = (r[0, 1] + r[1, 0]) / s
            y = 0.25 * s
            z = (r[1, 2] + r[2, 1]) / s
        else:
            s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
            w = (r[1, 0] - r[0, 1]) / s
            x = (r[0, 2] + r[2, 0]) / s
            y = (r[1, 2] + r[2, 1]) / s
            z = 0.25 * s
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q)


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotvec(q: np.ndarray) -> np.ndarray:
    """Rotation-vector (axis * angle) logarithm of a unit quaternion."""
    w, v = q[0], q[1:]
    if w < 0.0:
        w, v = -w, -v
    norm_v = np.linalg.norm(v)
    if norm_v < 1e-12:
        return 2.0 * v
    angle = 2.0 * np.arctan2(norm_v, w)
    return angle * v / norm_v


@dataclass(frozen=True)
class Pose:
    """End-effector pose: translation (m) and unit quaternion (w, x, y, z)."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "translation", np.asarray(self.translation, dtype=float)
        )
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        if self.translation.shape != (3,) or self.rotation.shape != (4,):
            raise InvalidParameterError("pose needs a 3-vector and a quaternion")
        if abs(np.linalg.norm(self.rotation) - 1.0) > 1e-9:
            raise InvalidParameterError("quaternion must be unit norm within 1e-9")


@dataclass(frozen=True)
class IkSettings:
    damping: float = 0.05
    max_iters: int = 200
    pos_tol: float = 1e-6
    rot_tol: float = 1e-6
    step_clamp: float = 0.2
    rot_weight: float = 1.0  # 0 disables orientation tracking (planar demos)

    def __post_init__(self):
        if (
            self.damping <= 0.0
            or self.max_iters <= 0
            or self.pos_tol <= 0.0
            or self.rot_tol <= 0.0
            or self.step_clamp <= 0.0
            or self.rot_weight < 0.0
        ):
            raise InvalidParameterError("IK settings must be positive")


def _walk_chain(config: RobotConfig, q: np.ndarray):
    """Compose per-joint transforms; returns joint frames and the tip pose.

    Each chain entry applies its fixed origin transform, then the joint
    motion (rotation about, or translation along, its axis).
    """
    r = np.eye(3)
    p = np.zeros(3)
    joint_frames = []  # (p_joint, axis_world, type) for movable joints
    qi = 0
    for cj in config.chain:
        p = p + r @ cj.origin_xyz
        r = r @ rpy_to_matrix(cj.origin_rpy)
        if cj.movable:
            axis = np.asarray(cj.axis, dtype=float)
            axis = axis / np.linalg.norm(axis)
            axis_world = r @ axis
            joint_frames.append((p.copy(), axis_world, cj.type))
            if cj.type == "prismatic":
                p = p + axis_world * q[qi]
            else:
                r = r @ axis_angle_matrix(axis, q[qi])
            qi += 1
    return joint_frames, p, r


def forward_kinematics(config: RobotConfig, q) -> Pose:
    q = np.asarray(q, dtype=float)
    if q.shape != (config.dof,):
        raise InvalidParameterError(f"q must have length {config.dof}")
    _, p, r = _walk_chain(config, q)
    return Pose(p, quat_from_matrix(r))


def link_positions(config: RobotConfig, q) -> np.ndarray:
    """World positions of each movable joint origin plus the tip; used for
    drawing the chain."""
    q = np.asarray(q, dtype=float)
    frames, p, _ = _walk_chain(config, q)
    pts = [f[0] for f in frames]
    pts.append(p)
    return np.array(pts)


def jacobian(config: RobotConfig, q) -> np.ndarray:
    """Geometric Jacobian (6 x dof): linear rows on top, angular below."""
    q = np.asarray(q, dtype=float)
    frames, p_tip, _ = _walk_chain(config, q)
    jac = np.zeros((6, config.dof))
    for i, (p_j, z_j, jtype) in enumerate(frames):
        if jtype == "prismatic":
            jac[:3, i] = z_j
        else:
            jac[:3, i] = np.cross(z_j, p_tip - p_j)
            jac[3:, i] = z_j
    return jac


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """6-vector [position error; orientation rotation-vector]."""
    dp = target.translation - current.translation
    dq = quat_multiply(target.rotation, quat_conjugate(current.rotation))
    return np.concatenate((dp, quat_rotvec(dq)))


def ik_solve(
    config: RobotConfig,
    target: Pose,
    seed,
    settings: IkSettings = IkSettings(),
) -> Optional[np.ndarray]:
    """Damped-least-squares IK; returns ``None`` when unreachable.

    Iterates ``dq = J^T (J J^T + lam^2 I)^{-1} e`` with a per-step clamp;
    the damping scales with the residual (full ``damping`` far from the
    target for stability near singularities, vanishing close to it so the
    local convergence is Gauss-Newton).  Iterates never exit the position
    limits.
    """
    q = np.asarray(seed, dtype=float).copy()
    lo = config.position_limits[:, 0]
    hi = config.position_limits[:, 1]
    if np.any(q < lo - 1e-12) or np.any(q > hi + 1e-12):
        raise InvalidParameterError("seed outside position limits")
    for _ in range(settings.max_iters):
        current = forward_kinematics(config, q)
        err = pose_error(target, current)
        pos_ok = np.linalg.norm(err[:3]) < settings.pos_tol
        rot_ok = (
            settings.rot_weight == 0.0
            or np.linalg.norm(err[3:]) < settings.rot_tol
        )
        if pos_ok and rot_ok:
            return q
        jac = jacobian(config, q)
        jac = jac.copy()
        jac[3:] *= settings.rot_weight
        err_eff = err.copy()
        err_eff[3:] *= settings.rot_weight
        lam = settings.damping * min(1.0, float(np.linalg.norm(err_eff)))
        jjt = jac @ jac.T + (lam * lam + 1e-12) * np.eye(6)
        dq = jac.T @ np.linalg.solve(jjt, err_eff)
        step = np.max(np.abs(dq))
        if step > settings.step_clamp:
            dq *= settings.step_clamp / step
        q = np.clip(q + dq, lo, hi)
    return None
