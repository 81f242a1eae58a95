import { describe, expect, it } from "vitest";

import { RollingBuffer } from "../src/buffers";
import { sparklinePoints } from "../src/charts";
import { chainPoints } from "../src/fk";
import type { ChainJointMsg } from "../src/protocol";
import { computeScene, pxToWorld, worldToPx } from "../src/scene";

const PLANAR: ChainJointMsg[] = [
  { name: "j1", type: "revolute", axis: [0, 0, 1], origin_xyz: [0, 0, 0], origin_rpy: [0, 0, 0] },
  { name: "j2", type: "revolute", axis: [0, 0, 1], origin_xyz: [1, 0, 0], origin_rpy: [0, 0, 0] },
  { name: "flange", type: "fixed", axis: [1, 0, 0], origin_xyz: [1, 0, 0], origin_rpy: [0, 0, 0] },
];

describe("chain forward kinematics", () => {
  it("draws the zero pose straight along +x", () => {
    const pts = chainPoints(PLANAR, [0, 0]);
    expect(pts.length).toBe(3); // two joints plus tip
    expect(pts[0][0]).toBeCloseTo(0, 12);
    expect(pts[1][0]).toBeCloseTo(1, 12);
    expect(pts[2][0]).toBeCloseTo(2, 12);
    for (const p of pts) expect(p[1]).toBeCloseTo(0, 12);
  });

  it("quarter turn points the chain along +y", () => {
    const pts = chainPoints(PLANAR, [Math.PI / 2, 0]);
    expect(pts[2][0]).toBeCloseTo(0, 9);
    expect(pts[2][1]).toBeCloseTo(2, 9);
  });

  it("elbow bend matches hand geometry", () => {
    const pts = chainPoints(PLANAR, [0, Math.PI / 2]);
    expect(pts[2][0]).toBeCloseTo(1, 9);
    expect(pts[2][1]).toBeCloseTo(1, 9);
  });
});

describe("viewport mapping", () => {
  const vp = { width: 640, height: 480, span: 5 };

  it("round-trips world <-> pixels", () => {
    for (const [x, y] of [[0, 0], [1.3, -0.8], [-2, 2]]) {
      const [px, py] = worldToPx(x, y, vp);
      const [wx, wy] = pxToWorld(px, py, vp);
      expect(wx).toBeCloseTo(x, 9);
      expect(wy).toBeCloseTo(y, 9);
    }
  });

  it("centers the origin and flips y", () => {
    expect(worldToPx(0, 0, vp)).toEqual([320, 240]);
    const [, py] = worldToPx(0, 1, vp);
    expect(py).toBeLessThan(240);
  });

  it("computeScene carries the stalled flag and maps the chain", () => {
    const config = {
      type: "config",
      robot_name: "demo",
      dof: 2,
      joint_names: ["j1", "j2"],
      position_limits: [],
      velocity_limits: [],
      chain: PLANAR,
      ui_rate_hz: 60,
      dt_output: 0.005,
      mode: "precise",
    } as never;
    const state = {
      type: "state",
      t: 0,
      q: [0, 0],
      ee: { x: 2, y: 0, z: 0, quaternion: [1, 0, 0, 0] },
      clamped: false,
      mode: "precise",
      metrics: { abs_accel: [0, 0] },
    } as never;
    const scene = computeScene(config, state, { x: 1, y: 1 }, true, vp);
    expect(scene.stalled).toBe(true);
    expect(scene.chainPx.length).toBe(3);
    expect(scene.targetPx).not.toBeNull();
  });
});

describe("rolling buffer", () => {
  it("evicts samples older than the window", () => {
    const buf = new RollingBuffer<{ t: number }>(10);
    for (let k = 0; k <= 300; k++) buf.push({ t: k * 0.1 });
    expect(buf.span).toBeLessThanOrEqual(10);
    expect(buf.latest()?.t).toBeCloseTo(30);
    expect(buf.view()[0].t).toBeGreaterThanOrEqual(20);
  });
});

describe("sparkline geometry", () => {
  it("normalizes into the unit square with the peak at the top", () => {
    const samples = [
      { t: 0, abs: [1.0] },
      { t: 5, abs: [4.0] },
      { t: 10, abs: [2.0] },
    ];
    const pts = sparklinePoints(samples, 0, 10);
    expect(pts.length).toBe(3);
    expect(pts[2][0]).toBeCloseTo(1); // newest at the right edge
    expect(Math.min(...pts.map(([, v]) => v))).toBeCloseTo(0); // peak touches top
    for (const [u, v] of pts) {
      expect(u).toBeGreaterThanOrEqual(0);
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });
});
