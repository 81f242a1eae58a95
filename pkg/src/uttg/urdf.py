"""URDF parsing and teleoperation config generation.

The parser extracts only what the servo engine consumes: joint kinematics
(axis, origin, parent/child) and limits.  Mimic joints, transmissions,
inertial and collision tags are ignored.  ``generate_config`` resolves a
serial chain between two links and synthesizes acceleration limits, which
URDF does not carry: ``accel_limit = accel_scale * velocity_limit / 0.1 s``
per joint, overridable by editing the emitted config file.
"""

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ChainResolutionError,
    InputFormatError,
    UrdfParseError,
    UrdfTopologyError,
    UrdfValidationError,
)

ACCEL_T_REF = 0.1  # seconds; velocity_limit / ACCEL_T_REF gives the accel limit

MOVABLE_TYPES = ("revolute", "continuous", "prismatic")
JOINT_TYPES = MOVABLE_TYPES + ("fixed",)


@dataclass
class JointLimitSpec:
    lower: float
    upper: float
    velocity: float
    effort: float = 0.0


@dataclass
class UrdfJoint:
    name: str
    type: str
    parent: str
    child: str
    origin_xyz: np.ndarray = field(default_factory=lambda: np.zeros(3))
    origin_rpy: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    limits: Optional[JointLimitSpec] = None

    @property
    def movable(self) -> bool:
        return self.type in MOVABLE_TYPES


@dataclass
class RobotModel:
    name: str
    links: list[str]
    joints: list[UrdfJoint]

    def joint_by_name(self, name: str) -> UrdfJoint:
        for j in self.joints:
            if j.name == name:
                return j
        raise KeyError(name)


def _parse_vec(text: Optional[str], n: int, default=0.0) -> np.ndarray:
    if text is None:
        return np.full(n, default, dtype=float)
    vals = [float(v) for v in text.split()]
    if len(vals) != n:
        raise UrdfParseError(f"expected {n} values, got {text!r}")
    return np.array(vals, dtype=float)


def parse_urdf(document: str) -> RobotModel:
    """Parse a URDF document into a :class:`RobotModel`.

    Raises :class:`UrdfParseError` (with line info) on malformed XML,
    :class:`UrdfValidationError` when a revolute/prismatic joint lacks its
    ``<limit>``, and :class:`UrdfTopologyError` when the link graph is not
    a connected tree.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise UrdfParseError(f"malformed XML: {exc}") from exc
    if root.tag != "robot":
        raise UrdfParseError(f"root element must be <robot>, got <{root.tag}>")

    links = [el.get("name") for el in root.findall("link")]
    if any(name is None for name in links):
        raise UrdfValidationError("link without a name attribute")

    joints = []
    for el in root.findall("joint"):
        name = el.get("name")
        jtype = el.get("type")
        if name is None or jtype is None:
            raise UrdfValidationError("joint missing name or type")
        if jtype not in JOINT_TYPES:
            raise UrdfValidationError(f"joint '{name}' has unsupported type '{jtype}'")
        parent_el = el.find("parent")
        child_el = el.find("child")
        if parent_el is None or child_el is None:
            raise UrdfValidationError(f"joint '{name}' missing parent or child link")
        origin = el.find("origin")
        xyz = _parse_vec(origin.get("xyz") if origin is not None else None, 3)
        rpy = _parse_vec(origin.get("rpy") if origin is not None else None, 3)
        axis_el = el.find("axis")
        if axis_el is not None:
            axis = _parse_vec(axis_el.get("xyz"), 3)
        else:
            axis = np.array([1.0, 0.0, 0.0])

        limit_el = el.find("limit")
        limits = None
        if limit_el is not None:
            limits = JointLimitSpec(
                lower=float(limit_el.get("lower", "nan"))
                if limit_el.get("lower") is not None
                else -math.inf,
                upper=float(limit_el.get("upper", "nan"))
                if limit_el.get("upper") is not None
                else math.inf,
                velocity=float(limit_el.get("velocity", "0")),
                effort=float(limit_el.get("effort", "0")),
            )
        if jtype in ("revolute", "prismatic"):
            if limits is None:
                raise UrdfValidationError(f"joint '{name}' has no <limit> element")
            if not limits.lower <= limits.upper:
                raise UrdfValidationError(
                    f"joint '{name}' has lower > upper position limit"
                )
        if jtype == "continuous" and limits is not None:
            limits.lower = -math.inf
            limits.upper = math.inf

        joints.append(
            UrdfJoint(
                name=name,
                type=jtype,
                parent=parent_el.get("link"),
                child=child_el.get("link"),
                origin_xyz=xyz,
                origin_rpy=rpy,
                axis=axis,
                limits=limits,
            )
        )

    model = RobotModel(name=root.get("name", "robot"), links=links, joints=joints)
    _check_topology(model)
    return model


def _check_topology(model: RobotModel) -> None:
    link_set = set(model.links)
    children = {}
    for j in model.joints:
        if j.parent not in link_set or j.child not in link_set:
            raise UrdfTopologyError(
                f"joint '{j.name}' references undeclared link "
                f"'{j.parent if j.parent not in link_set else j.child}'"
            )
        if j.child in children:
            raise UrdfTopologyError(f"link '{j.child}' has two parent joints")
        children[j.child] = j
    roots = [l for l in model.links if l not in children]
    if len(roots) != 1:
        raise UrdfTopologyError(
            f"expected one root link, found {len(roots)}: {sorted(roots)}"
        )
    # walk up from every link; a cycle or unreachable root means a bad tree
    root = roots[0]
    for link in model.links:
        seen = set()
        cur = link
        while cur != root:
            if cur in seen:
                raise UrdfTopologyError(f"cycle through link '{cur}'")
            seen.add(cur)
            cur = children[cur].parent


def serialize_urdf(model: RobotModel) -> str:
    """Emit the model back as URDF text (field-exact round trip)."""
    lines = [f'<robot name="{model.name}">']
    joints_done = set()
    for link in model.links:
        lines.append(f'  <link name="{link}"/>')
    for j in model.joints:
        joints_done.add(j.name)
        lines.append(f'  <joint name="{j.name}" type="{j.type}">')
        lines.append(f'    <parent link="{j.parent}"/>')
        lines.append(f'    <child link="{j.child}"/>')
        xyz = " ".join(repr(float(v)) for v in j.origin_xyz)
        rpy = " ".join(repr(float(v)) for v in j.origin_rpy)
        lines.append(f'    <origin xyz="{xyz}" rpy="{rpy}"/>')
        axis = " ".join(repr(float(v)) for v in j.axis)
        lines.append(f'    <axis xyz="{axis}"/>')
        if j.limits is not None and j.type != "fixed":
            attrs = []
            if math.isfinite(j.limits.lower) or math.isfinite(j.limits.upper):
                attrs.append(f'lower="{j.limits.lower!r}" upper="{j.limits.upper!r}"')
            attrs.append(f'velocity="{j.limits.velocity!r}"')
            attrs.append(f'effort="{j.limits.effort!r}"')
            lines.append(f"    <limit {' '.join(attrs)}/>")
        lines.append("  </joint>")
    lines.append("</robot>")
    return "\n".join(lines) + "\n"


@dataclass
class ChainJoint:
    """One joint of the resolved base-to-tip chain (fixed joints included)."""

    name: str
    type: str
    axis: np.ndarray
    origin_xyz: np.ndarray
    origin_rpy: np.ndarray

    @property
    def movable(self) -> bool:
        return self.type in MOVABLE_TYPES


@dataclass
class RobotConfig:
    """Everything the engine needs, decoupled from the URDF document."""

    robot_name: str
    dof: int
    joint_names: list[str]
    position_limits: np.ndarray  # (dof, 2), +-inf for continuous joints
    velocity_limits: np.ndarray  # (dof,)
    acceleration_limits: np.ndarray  # (dof,)
    chain: list[ChainJoint]
    base_link: str = ""
    tip_link: str = ""

    def __post_init__(self):
        self.position_limits = np.asarray(self.position_limits, dtype=float)
        self.velocity_limits = np.asarray(self.velocity_limits, dtype=float)
        self.acceleration_limits = np.asarray(self.acceleration_limits, dtype=float)
        for arr, label in (
            (self.position_limits, "position_limits"),
            (self.velocity_limits, "velocity_limits"),
            (self.acceleration_limits, "acceleration_limits"),
        ):
            if arr.shape[0] != self.dof:
                raise InputFormatError(f"{label} length must equal dof={self.dof}")
        if np.any(self.velocity_limits <= 0.0) or np.any(
            self.acceleration_limits <= 0.0
        ):
            raise InputFormatError("velocity/acceleration limits must be positive")

    def to_json_dict(self) -> dict:
        joints = []
        idx = 0
        for cj in self.chain:
            if not cj.movable:
                continue
            lo, hi = self.position_limits[idx]
            joints.append(
                {
                    "name": self.joint_names[idx],
                    "type": cj.type,
                    "position_limits": [
                        None if not math.isfinite(lo) else lo,
                        None if not math.isfinite(hi) else hi,
                    ],
                    "velocity_limit": float(self.velocity_limits[idx]),
                    "acceleration_limit": float(self.acceleration_limits[idx]),
                    "axis": [float(v) for v in cj.axis],
                    "origin": {
                        "xyz": [float(v) for v in cj.origin_xyz],
                        "rpy": [float(v) for v in cj.origin_rpy],
                    },
                }
            )
            idx += 1
        fixed = [
            {
                "name": cj.name,
                "type": cj.type,
                "origin": {
                    "xyz": [float(v) for v in cj.origin_xyz],
                    "rpy": [float(v) for v in cj.origin_rpy],
                },
            }
            for cj in self.chain
            if not cj.movable
        ]
        return {
            "robot_name": self.robot_name,
            "dof": self.dof,
            "joints": joints,
            "fixed_joints": fixed,
            "chain": {
                "base": self.base_link,
                "tip": self.tip_link,
                "order": [cj.name for cj in self.chain],
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RobotConfig":
        try:
            by_name = {j["name"]: j for j in data["joints"]}
            fixed = {j["name"]: j for j in data.get("fixed_joints", [])}
            order = data["chain"]["order"]
            chain = []
            names, plim, vlim, alim = [], [], [], []
            for name in order:
                if name in by_name:
                    j = by_name[name]
                    chain.append(
                        ChainJoint(
                            name=name,
                            type=j.get("type", "revolute"),
                            axis=np.asarray(j["axis"], dtype=float),
                            origin_xyz=np.asarray(j["origin"]["xyz"], dtype=float),
                            origin_rpy=np.asarray(j["origin"]["rpy"], dtype=float),
                        )
                    )
                    lo, hi = j["position_limits"]
                    plim.append(
                        [
                            -math.inf if lo is None else float(lo),
                            math.inf if hi is None else float(hi),
                        ]
                    )
                    vlim.append(float(j["velocity_limit"]))
                    alim.append(float(j["acceleration_limit"]))
                    names.append(name)
                else:
                    j = fixed[name]
                    chain.append(
                        ChainJoint(
                            name=name,
                            type="fixed",
                            axis=np.array([1.0, 0.0, 0.0]),
                            origin_xyz=np.asarray(j["origin"]["xyz"], dtype=float),
                            origin_rpy=np.asarray(j["origin"]["rpy"], dtype=float),
                        )
                    )
            return cls(
                robot_name=data["robot_name"],
                dof=int(data["dof"]),
                joint_names=names,
                position_limits=np.array(plim),
                velocity_limits=np.array(vlim),
                acceleration_limits=np.array(alim),
                chain=chain,
                base_link=data["chain"]["base"],
                tip_link=data["chain"]["tip"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"bad config document: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RobotConfig":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def generate_config(
    model: RobotModel, base_link: str, tip_link: str, accel_scale: float = 1.0
) -> RobotConfig:
    """Resolve the serial chain base->tip and build the engine config.

    Fixed joints are retained in the chain for forward kinematics but
    excluded from the DoF count.
    """
    link_set = set(model.links)
    for link in (base_link, tip_link):
        if link not in link_set:
            raise ChainResolutionError(f"link '{link}' not in model")
    parent_joint = {j.child: j for j in model.joints}
    chain_joints: list[UrdfJoint] = []
    cur = tip_link
    while cur != base_link:
        j = parent_joint.get(cur)
        if j is None:
            raise ChainResolutionError(
                f"no path from '{base_link}' to '{tip_link}' (stuck at '{cur}')"
            )
        chain_joints.append(j)
        cur = j.parent
    chain_joints.reverse()

    names, plim, vlim, alim = [], [], [], []
    chain = []
    for j in chain_joints:
        chain.append(
            ChainJoint(
                name=j.name,
                type=j.type,
                axis=j.axis.copy(),
                origin_xyz=j.origin_xyz.copy(),
                origin_rpy=j.origin_rpy.copy(),
            )
        )
        if not j.movable:
            continue
        if j.limits is None or j.limits.velocity <= 0.0:
            raise UrdfValidationError(
                f"movable joint '{j.name}' needs a positive velocity limit"
            )
        names.append(j.name)
        if j.type == "continuous":
            plim.append([-math.inf, math.inf])
        else:
            plim.append([j.limits.lower, j.limits.upper])
        vlim.append(j.limits.velocity)
        alim.append(accel_scale * j.limits.velocity / ACCEL_T_REF)

    if not names:
        raise ChainResolutionError(
            f"chain '{base_link}'->'{tip_link}' has no movable joints"
        )
    return RobotConfig(
        robot_name=model.name,
        dof=len(names),
        joint_names=names,
        position_limits=np.array(plim),
        velocity_limits=np.array(vlim),
        acceleration_limits=np.array(alim),
        chain=chain,
        base_link=base_link,
        tip_link=tip_link,
    )
