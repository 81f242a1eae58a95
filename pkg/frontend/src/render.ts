/** Canvas painting of the arm scene (DOM side, no logic). */

import type { SceneModel } from "./scene";

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: SceneModel,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);

  ctx.strokeStyle = "#334155";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.moveTo(width / 2, 0);
  ctx.lineTo(width / 2, height);
  ctx.stroke();

  if (scene.chainPx.length >= 2) {
    ctx.strokeStyle = "#e2e8f0";
    ctx.lineWidth = 5;
    ctx.lineCap = "round";
    ctx.beginPath();
    scene.chainPx.forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    for (const [x, y] of scene.chainPx) {
      ctx.fillStyle = "#38bdf8";
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  if (scene.eePx) {
    ctx.fillStyle = "#34d399";
    ctx.beginPath();
    ctx.arc(scene.eePx[0], scene.eePx[1], 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (scene.targetPx) {
    const [x, y] = scene.targetPx;
    ctx.strokeStyle = "#f59e0b";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(x, y, 9, 0, 2 * Math.PI);
    ctx.moveTo(x - 13, y);
    ctx.lineTo(x + 13, y);
    ctx.moveTo(x, y - 13);
    ctx.lineTo(x, y + 13);
    ctx.stroke();
  }

  if (scene.stalled) {
    ctx.fillStyle = "#f87171";
    ctx.font = "bold 14px sans-serif";
    ctx.fillText("STALLED", 10, 20);
  }
}
