/** Chart geometry helpers plus the canvas painters for the metric views. */

import type { RollingBuffer } from "./buffers";
import type { AccelSample, PathSample } from "./session";
import { Viewport, worldToPx } from "./scene";

/** Normalize one joint's |accel| series into unit-square polyline points. */
export function sparklinePoints(
  samples: readonly AccelSample[],
  joint: number,
  windowS: number,
): [number, number][] {
  if (samples.length === 0) return [];
  const tEnd = samples[samples.length - 1].t;
  const peak = Math.max(1e-9, ...samples.map((s) => s.abs[joint]));
  return samples.map((s) => [
    1 - Math.min(1, (tEnd - s.t) / windowS),
    1 - s.abs[joint] / peak,
  ]);
}

export function drawSparklines(
  ctx: CanvasRenderingContext2D,
  accel: RollingBuffer<AccelSample>,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const samples = accel.view();
  if (samples.length === 0) return;
  const nJoints = samples[0].abs.length;
  const rowH = height / nJoints;
  ctx.font = "10px monospace";
  for (let j = 0; j < nJoints; j++) {
    const pts = sparklinePoints(samples, j, accel.windowS);
    ctx.strokeStyle = "#67e8f9";
    ctx.beginPath();
    pts.forEach(([u, v], i) => {
      const x = u * width;
      const y = j * rowH + 4 + v * (rowH - 14);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    const latest = samples[samples.length - 1].abs[j];
    ctx.fillStyle = "#94a3b8";
    ctx.fillText(`|a${j}| ${latest.toFixed(2)} rad/s²`, 4, (j + 1) * rowH - 3);
  }
}

export function drawPathOverlay(
  ctx: CanvasRenderingContext2D,
  target: RollingBuffer<PathSample>,
  actual: RollingBuffer<PathSample>,
  vp: Viewport,
): void {
  const paint = (buf: RollingBuffer<PathSample>, color: string) => {
    const pts = buf.view();
    if (pts.length < 2) return;
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((p, i) => {
      const [x, y] = worldToPx(p.x, p.y, vp);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  };
  paint(target, "#f59e0b");
  paint(actual, "#34d399");
}
