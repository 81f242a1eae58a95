/** Console wiring: DOM, drag input, render loop. */

import { drawPathOverlay, drawSparklines } from "./charts";
import type { Mode } from "./protocol";
import { drawScene } from "./render";
import { Viewport, computeScene, pxToWorld } from "./scene";
import { ConsoleSession, SocketLike } from "./session";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function wrapWebSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (data) => ws.readyState === WebSocket.OPEN && ws.send(data),
    close: () => ws.close(),
    onmessage: null,
    onclose: null,
    onopen: null,
  };
  ws.onmessage = (ev) => like.onmessage?.(String(ev.data));
  ws.onclose = () => like.onclose?.();
  ws.onopen = () => like.onopen?.();
  return like;
}

const arm = el<HTMLCanvasElement>("arm");
const charts = el<HTMLCanvasElement>("charts");
const statusBadge = el<HTMLSpanElement>("status");
const modeBadge = el<HTMLSpanElement>("mode-badge");
const errorLine = el<HTMLDivElement>("errors");

const vp: Viewport = { width: arm.width, height: arm.height, span: 5.0 };

const session = new ConsoleSession({
  onPhase: (phase) => {
    statusBadge.textContent = phase;
    statusBadge.className = `badge ${phase}`;
  },
  onConfig: (config) => {
    errorLine.textContent = `connected to ${config.robot_name} (dof=${config.dof})`;
  },
  onModeAck: (mode) => {
    modeBadge.textContent = mode;
    modeBadge.className = `badge ${mode}`;
  },
  onError: (message) => {
    errorLine.textContent = message;
  },
});

el<HTMLButtonElement>("connect").onclick = () => {
  const url = el<HTMLInputElement>("url").value;
  const socket = wrapWebSocket(url);
  session.attach(socket);
};
el<HTMLButtonElement>("start").onclick = () => session.start();
el<HTMLButtonElement>("stop").onclick = () => session.stop();
el<HTMLButtonElement>("precise").onclick = () => session.requestMode("precise" as Mode);
el<HTMLButtonElement>("rapid").onclick = () => session.requestMode("rapid" as Mode);

let dragging = false;
const dragAt = (ev: PointerEvent) => {
  const rect = arm.getBoundingClientRect();
  const [x, y] = pxToWorld(ev.clientX - rect.left, ev.clientY - rect.top, vp);
  session.dragTarget(x, y);
};
arm.addEventListener("pointerdown", (ev) => {
  dragging = true;
  arm.setPointerCapture(ev.pointerId);
  dragAt(ev);
});
arm.addEventListener("pointermove", (ev) => {
  if (dragging) dragAt(ev);
});
arm.addEventListener("pointerup", () => {
  dragging = false;
});

const armCtx = arm.getContext("2d")!;
const chartsCtx = charts.getContext("2d")!;

function frame(): void {
  // frame-latest snapshot: always the newest state, never a queue
  const scene = computeScene(
    session.config,
    session.latestState,
    session.target,
    session.stalled(),
    vp,
  );
  drawScene(armCtx, scene, arm.width, arm.height);
  drawPathOverlay(armCtx, session.targetPath, session.actualPath, vp);
  drawSparklines(chartsCtx, session.accel, charts.width, charts.height);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
