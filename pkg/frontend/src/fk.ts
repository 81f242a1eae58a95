/** Minimal forward kinematics for drawing the chain from broadcast joint
 * values. Full 3D composition, projected to the x-y plane by the caller. */

import type { ChainJointMsg } from "./protocol";

type Mat3 = number[]; // row-major 3x3
type Vec3 = [number, number, number];

const EYE: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];

function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array(9).fill(0);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let s = 0;
      for (let k = 0; k < 3; k++) s += a[3 * i + k] * b[3 * k + j];
      out[3 * i + j] = s;
    }
  }
  return out;
}

function matVec(a: Mat3, v: Vec3): Vec3 {
  return [
    a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
    a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
    a[6] * v[0] + a[7] * v[1] + a[8] * v[2],
  ];
}

function rpyMatrix(rpy: number[]): Mat3 {
  const [r, p, y] = rpy;
  const [cr, sr, cp, sp, cy, sy] = [
    Math.cos(r), Math.sin(r), Math.cos(p), Math.sin(p), Math.cos(y), Math.sin(y),
  ];
  return [
    cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
    sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
    -sp, cp * sr, cp * cr,
  ];
}

function axisAngle(axis: number[], angle: number): Mat3 {
  const n = Math.hypot(axis[0], axis[1], axis[2]) || 1;
  const [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const t = 1 - c;
  return [
    t * x * x + c, t * x * y - s * z, t * x * z + s * y,
    t * x * y + s * z, t * y * y + c, t * y * z - s * x,
    t * x * z - s * y, t * y * z + s * x, t * z * z + c,
  ];
}

/** World positions of each movable joint origin plus the tip. */
export function chainPoints(chain: ChainJointMsg[], q: number[]): Vec3[] {
  let rot: Mat3 = EYE;
  let pos: Vec3 = [0, 0, 0];
  let qi = 0;
  const pts: Vec3[] = [];
  for (const joint of chain) {
    const step = matVec(rot, joint.origin_xyz as Vec3);
    pos = [pos[0] + step[0], pos[1] + step[1], pos[2] + step[2]];
    rot = matMul(rot, rpyMatrix(joint.origin_rpy));
    if (joint.type === "fixed") continue;
    pts.push([...pos] as Vec3);
    const axisWorld = matVec(rot, joint.axis as Vec3);
    if (joint.type === "prismatic") {
      pos = [
        pos[0] + axisWorld[0] * q[qi],
        pos[1] + axisWorld[1] * q[qi],
        pos[2] + axisWorld[2] * q[qi],
      ];
    } else {
      rot = matMul(rot, axisAngle(joint.axis, q[qi]));
    }
    qi += 1;
  }
  pts.push(pos);
  return pts;
}
