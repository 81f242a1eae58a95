/** Wire protocol of the teleoperation bridge: JSON text messages. */

export interface ChainJointMsg {
  name: string;
  type: string;
  axis: number[];
  origin_xyz: number[];
  origin_rpy: number[];
}

export interface ConfigMsg {
  type: "config";
  robot_name: string;
  dof: number;
  joint_names: string[];
  position_limits: (number | null)[][];
  velocity_limits: number[];
  chain: ChainJointMsg[];
  ui_rate_hz: number;
  dt_output: number;
  mode: string;
}

export interface StateMsg {
  type: "state";
  t: number;
  q: number[];
  ee: { x: number; y: number; z: number; quaternion: number[] };
  clamped: boolean;
  mode: string;
  metrics: { abs_accel: number[] };
}

export interface AckMsg {
  type: "ack";
  what: string;
  value?: string;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = ConfigMsg | StateMsg | AckMsg | ErrorMsg;

export type Mode = "precise" | "rapid";

export function parseServerMsg(raw: string): ServerMsg {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch (err) {
    throw new Error(`not JSON: ${err}`);
  }
  if (typeof data !== "object" || data === null || !("type" in data)) {
    throw new Error("message has no type field");
  }
  const msg = data as { type: string };
  switch (msg.type) {
    case "config": {
      const c = data as ConfigMsg;
      if (!Number.isInteger(c.dof) || !Array.isArray(c.chain)) {
        throw new Error("malformed config message");
      }
      return c;
    }
    case "state": {
      const s = data as StateMsg;
      if (!Array.isArray(s.q) || typeof s.t !== "number") {
        throw new Error("malformed state message");
      }
      return s;
    }
    case "ack":
      return data as AckMsg;
    case "error":
      return data as ErrorMsg;
    default:
      throw new Error(`unknown message type '${msg.type}'`);
  }
}

export function targetPoseMsg(x: number, y: number): string {
  return JSON.stringify({ type: "target_pose", x, y, z: 0.0 });
}

export function targetJointsMsg(q: number[]): string {
  return JSON.stringify({ type: "target_joints", q });
}

export function modeMsg(mode: Mode): string {
  return JSON.stringify({ type: "mode", value: mode });
}

export function startMsg(): string {
  return JSON.stringify({ type: "start" });
}

export function stopMsg(): string {
  return JSON.stringify({ type: "stop" });
}
