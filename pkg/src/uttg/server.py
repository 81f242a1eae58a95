"""Live teleoperation bridge: one operator session over a WebSocket.

Message pipeline per the wire protocol: pose targets go through IK, all
targets are filtered in joint space and buffered; the servo engine plans
and a paced sender feeds the simulated actuator; state snapshots broadcast
at the UI rate (decoupled from the internal command rate, which never
crosses the wire).

The engine runs as a two-stage pipeline: an executor thread plans the next
command batch while the sender thread paces the current one through a
single-slot handoff.  Mode switches apply at the next segment boundary;
the session is single-operator (a second connection is refused).
"""

import asyncio
import json
import logging
import mimetypes
import queue
import threading
import time
from dataclasses import dataclass
from http import HTTPStatus
from pathlib import Path
from typing import Optional

import numpy as np
from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from .harness import ActuatorModel
from .kinematics import IkSettings, Pose, forward_kinematics, ik_solve
from .preprocess import FilterSettings
from .servo import ServoEngine, ServoSettings
from .urdf import RobotConfig

logger = logging.getLogger(__name__)


@dataclass
class _Snapshot:
    t: float
    q: np.ndarray
    clamped: bool
    abs_accel: np.ndarray
    mode: str


class LiveServoRuntime:
    """Executor + sender threads around a ServoEngine, wall-clock paced."""

    def __init__(
        self,
        config: RobotConfig,
        settings: ServoSettings,
        filter_settings: FilterSettings,
        initial_q: np.ndarray,
        actuator: ActuatorModel,
    ):
        self.config = config
        self.settings = settings
        self.engine = ServoEngine(config, settings, initial_q, filter_settings)
        self.actuator = actuator
        self.ops: queue.Queue = queue.Queue()
        self._batches: queue.Queue = queue.Queue(maxsize=1)  # single-slot handoff
        self._alive = True
        self._t_wall0 = time.monotonic()
        dt = settings.dt_output
        self._recent = [initial_q.copy()] * 3
        self.snapshot = _Snapshot(0.0, initial_q.copy(), False, np.zeros(config.dof), settings.mode)
        self._lag_state = initial_q.copy()
        self._dt = dt
        self._executor = threading.Thread(target=self._executor_loop, daemon=True)
        self._sender = threading.Thread(target=self._sender_loop, daemon=True)

    def start(self) -> None:
        self._executor.start()
        self._sender.start()

    def close(self) -> None:
        self._alive = False
        self.ops.put(("quit",))

    def now(self) -> float:
        return time.monotonic() - self._t_wall0

    # -------------------------------------------------- operator-facing ops

    def push_target(self, q: np.ndarray) -> None:
        self.ops.put(("target", self.now(), q))

    def set_mode(self, mode: str) -> None:
        self.ops.put(("mode", mode))

    def request_stop(self) -> None:
        self.ops.put(("stop",))

    def request_start(self) -> None:
        self.ops.put(("start",))

    # ------------------------------------------------------------- threads

    def _drain_ops(self, block: bool) -> None:
        try:
            while True:
                op = self.ops.get(block=block, timeout=0.002 if block else None)
                block = False
                if op[0] == "target":
                    self.engine.push_input(op[1], op[2])
                elif op[0] == "mode":
                    if op[1] != self.settings.mode:
                        self.settings.mode = op[1]
                        self.settings.mu = None  # fall back to the mode default
                elif op[0] == "stop":
                    self.engine.request_stop()
                elif op[0] == "start":
                    self.engine.start_servo = True
                elif op[0] == "quit":
                    return
        except queue.Empty:
            pass

    def _executor_loop(self) -> None:
        while self._alive:
            self._drain_ops(block=self.engine.idle)
            if not self._alive:
                break
            if self.engine.idle:
                continue
            try:
                cmds = self.engine.step()
            except Exception:
                logger.exception("planner failure; holding at last command")
                self.engine.request_stop()
                continue
            if cmds:
                self._batches.put(cmds)  # blocks while the sender paces

    def _sender_loop(self) -> None:
        while self._alive:
            try:
                cmds = self._batches.get(timeout=0.05)
            except queue.Empty:
                continue
            t_anchor = self.engine.t0 or 0.0
            for cmd in cmds:
                due = self._t_wall0 + (cmd.t - t_anchor)
                delay = due - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                self._apply_command(cmd)

    def _apply_command(self, cmd) -> None:
        if self.actuator.mode == "perfect":
            pos = cmd.q
        else:
            decay = np.exp(-self._dt / self.actuator.time_constant)
            self._lag_state = cmd.q + (self._lag_state - cmd.q) * decay
            pos = self._lag_state
        self._recent = [self._recent[-2], self._recent[-1], pos.copy()]
        acc = np.abs(self._recent[2] - 2.0 * self._recent[1] + self._recent[0]) / self._dt**2
        self.snapshot = _Snapshot(self.now(), pos.copy(), bool(cmd.clamped), acc, self.settings.mode)


class BridgeServer:
    """Single-session WebSocket service exposing the live servo loop."""

    def __init__(
        self,
        config: RobotConfig,
        settings: ServoSettings,
        *,
        filter_settings: Optional[FilterSettings] = None,
        ui_rate_hz: float = 60.0,
        actuator: Optional[ActuatorModel] = None,
        static_dir: Optional[str] = None,
        initial_q: Optional[np.ndarray] = None,
    ):
        self.config = config
        self.settings = settings
        self.filter_settings = filter_settings or FilterSettings()
        self.ui_rate_hz = ui_rate_hz
        self.actuator = actuator or ActuatorModel()
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        lo = np.where(np.isfinite(config.position_limits[:, 0]), config.position_limits[:, 0], -np.pi)
        hi = np.where(np.isfinite(config.position_limits[:, 1]), config.position_limits[:, 1], np.pi)
        self.robot_q = np.clip(np.zeros(config.dof), lo, hi) if initial_q is None else np.asarray(initial_q, float)
        self._session_lock = threading.Lock()
        self._have_session = False
        ik_rot_weight = 1.0 if config.dof >= 6 else 0.0
        self.ik_settings = IkSettings(rot_weight=ik_rot_weight, pos_tol=1e-4, rot_tol=1e-3)

    # ---------------------------------------------------------------- HTTP

    def _process_request(self, connection, request):
        if "Upgrade" in request.headers:
            return None
        path = request.path.split("?", 1)[0]
        if self.static_dir is None:
            if path in ("/", "/healthz"):
                return connection.respond(HTTPStatus.OK, "uttg bridge running\n")
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        headers = Headers(
            [("Content-Type", ctype), ("Content-Length", str(len(body)))]
        )
        return Response(HTTPStatus.OK.value, HTTPStatus.OK.phrase, headers, body)

    # ------------------------------------------------------------- session

    def _config_message(self) -> dict:
        return {
            "type": "config",
            "robot_name": self.config.robot_name,
            "dof": self.config.dof,
            "joint_names": self.config.joint_names,
            "position_limits": [
                [None if not np.isfinite(v) else float(v) for v in row]
                for row in self.config.position_limits
            ],
            "velocity_limits": self.config.velocity_limits.tolist(),
            "chain": [
                {
                    "name": cj.name,
                    "type": cj.type,
                    "axis": cj.axis.tolist(),
                    "origin_xyz": cj.origin_xyz.tolist(),
                    "origin_rpy": cj.origin_rpy.tolist(),
                }
                for cj in self.config.chain
            ],
            "ui_rate_hz": self.ui_rate_hz,
            "dt_output": self.settings.dt_output,
            "mode": self.settings.mode,
        }

    async def _handle(self, websocket) -> None:
        with self._session_lock:
            if self._have_session:
                await websocket.send(
                    json.dumps({"type": "error", "message": "session already active"})
                )
                await websocket.close(code=1013, reason="single-operator service")
                return
            self._have_session = True
        runtime = LiveServoRuntime(
            self.config,
            ServoSettings(
                mode=self.settings.mode,
                mu=self.settings.mu,
                beta=self.settings.beta,
                dt_output=self.settings.dt_output,
                dt_servo=self.settings.dt_servo,
            ),
            self.filter_settings,
            self.robot_q.copy(),
            self.actuator,
        )
        runtime.start()
        broadcaster = asyncio.create_task(self._broadcast_loop(websocket, runtime))
        last_target_q = self.robot_q.copy()
        try:
            await websocket.send(json.dumps(self._config_message()))
            async for raw in websocket:
                reply = self._dispatch(runtime, raw, last_target_q)
                if reply is not None:
                    await websocket.send(json.dumps(reply))
        except Exception:
            logger.debug("session closed", exc_info=True)
        finally:
            broadcaster.cancel()
            self.robot_q = runtime.snapshot.q.copy()
            runtime.close()
            with self._session_lock:
                self._have_session = False

    def _dispatch(self, runtime: LiveServoRuntime, raw, last_target_q) -> Optional[dict]:
        try:
            msg = json.loads(raw)
            mtype = msg["type"]
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            return {"type": "error", "message": f"malformed message: {exc}"}
        try:
            if mtype == "target_joints":
                q = np.asarray(msg["q"], dtype=float)
                if q.shape != (self.config.dof,):
                    return {"type": "error", "message": f"need {self.config.dof} joints"}
                last_target_q[:] = q
                runtime.push_target(q)
                return None
            if mtype == "target_pose":
                quat = np.asarray(
                    msg.get("quaternion", [1.0, 0.0, 0.0, 0.0]), dtype=float
                )
                quat = quat / np.linalg.norm(quat)
                pose = Pose(
                    np.array([msg["x"], msg["y"], msg.get("z", 0.0)], dtype=float),
                    quat,
                )
                q = ik_solve(self.config, pose, last_target_q, self.ik_settings)
                if q is None:
                    return {"type": "error", "message": "target unreachable"}
                last_target_q[:] = q
                runtime.push_target(q)
                return None
            if mtype == "mode":
                value = msg["value"]
                if value not in ("precise", "rapid"):
                    return {"type": "error", "message": f"unknown mode '{value}'"}
                runtime.set_mode(value)
                return {"type": "ack", "what": "mode", "value": value}
            if mtype == "start":
                runtime.request_start()
                return {"type": "ack", "what": "start"}
            if mtype == "stop":
                runtime.request_stop()
                return {"type": "ack", "what": "stop"}
            return {"type": "error", "message": f"unknown message type '{mtype}'"}
        except (KeyError, ValueError, TypeError) as exc:
            return {"type": "error", "message": f"bad message: {exc}"}

    async def _broadcast_loop(self, websocket, runtime: LiveServoRuntime) -> None:
        period = 1.0 / self.ui_rate_hz
        next_due = time.monotonic()
        while True:
            next_due += period
            delay = next_due - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            snap = runtime.snapshot
            ee = forward_kinematics(self.config, snap.q)
            msg = {
                "type": "state",
                "t": snap.t,
                "q": snap.q.tolist(),
                "ee": {
                    "x": float(ee.translation[0]),
                    "y": float(ee.translation[1]),
                    "z": float(ee.translation[2]),
                    "quaternion": ee.rotation.tolist(),
                },
                "clamped": bool(snap.clamped),
                "mode": snap.mode,
                "metrics": {"abs_accel": snap.abs_accel.tolist()},
            }
            await websocket.send(json.dumps(msg))

    async def run(self, host: str = "127.0.0.1", port: int = 8765) -> None:
        async with serve(
            self._handle, host, port, process_request=self._process_request
        ) as server:
            logger.info("bridge listening on ws://%s:%d", host, port)
            await server.serve_forever()


def serve_forever(
    config: RobotConfig,
    settings: ServoSettings,
    host: str = "127.0.0.1",
    port: int = 8765,
    **kwargs,
) -> None:
    server = BridgeServer(config, settings, **kwargs)
    asyncio.run(server.run(host, port))
