import { describe, expect, it } from "vitest";

import {
  modeMsg,
  parseServerMsg,
  startMsg,
  stopMsg,
  targetJointsMsg,
  targetPoseMsg,
} from "../src/protocol";

describe("protocol", () => {
  it("parses a config message", () => {
    const msg = parseServerMsg(
      JSON.stringify({
        type: "config",
        robot_name: "demo",
        dof: 2,
        joint_names: ["j1", "j2"],
        position_limits: [[-1, 1], [-1, 1]],
        velocity_limits: [3.5, 3.5],
        chain: [],
        ui_rate_hz: 60,
        dt_output: 0.005,
        mode: "precise",
      }),
    );
    expect(msg.type).toBe("config");
    if (msg.type === "config") expect(msg.dof).toBe(2);
  });

  it("parses a state message", () => {
    const msg = parseServerMsg(
      JSON.stringify({
        type: "state",
        t: 1.5,
        q: [0.1, 0.2],
        ee: { x: 1, y: 0, z: 0, quaternion: [1, 0, 0, 0] },
        clamped: false,
        mode: "rapid",
        metrics: { abs_accel: [0, 0] },
      }),
    );
    expect(msg.type).toBe("state");
    if (msg.type === "state") expect(msg.q).toEqual([0.1, 0.2]);
  });

  it("rejects garbage", () => {
    expect(() => parseServerMsg("not json")).toThrow();
    expect(() => parseServerMsg("{}")).toThrow();
    expect(() => parseServerMsg('{"type": "wat"}')).toThrow();
    expect(() => parseServerMsg('{"type": "state", "q": 3}')).toThrow();
  });

  it("serializes outbound messages verbatim per the wire format", () => {
    expect(JSON.parse(targetJointsMsg([0.1, 0.2]))).toEqual({
      type: "target_joints",
      q: [0.1, 0.2],
    });
    expect(JSON.parse(targetPoseMsg(1.0, -0.5))).toEqual({
      type: "target_pose",
      x: 1.0,
      y: -0.5,
      z: 0.0,
    });
    expect(JSON.parse(modeMsg("rapid"))).toEqual({ type: "mode", value: "rapid" });
    expect(JSON.parse(startMsg())).toEqual({ type: "start" });
    expect(JSON.parse(stopMsg())).toEqual({ type: "stop" });
  });
});
