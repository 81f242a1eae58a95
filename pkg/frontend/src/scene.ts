/** Pure view-model computation: everything the canvas needs, no DOM. */

import { chainPoints } from "./fk";
import type { ConfigMsg, StateMsg } from "./protocol";

export interface Viewport {
  width: number;
  height: number;
  /** workspace metres shown across the smaller canvas dimension */
  span: number;
}

export interface SceneModel {
  chainPx: [number, number][];
  eePx: [number, number] | null;
  targetPx: [number, number] | null;
  stalled: boolean;
}

export function worldToPx(
  x: number,
  y: number,
  vp: Viewport,
): [number, number] {
  const scale = Math.min(vp.width, vp.height) / vp.span;
  return [vp.width / 2 + x * scale, vp.height / 2 - y * scale];
}

export function pxToWorld(
  px: number,
  py: number,
  vp: Viewport,
): [number, number] {
  const scale = Math.min(vp.width, vp.height) / vp.span;
  return [(px - vp.width / 2) / scale, (vp.height / 2 - py) / scale];
}

export function computeScene(
  config: ConfigMsg | null,
  state: StateMsg | null,
  target: { x: number; y: number } | null,
  stalled: boolean,
  vp: Viewport,
): SceneModel {
  let chainPx: [number, number][] = [];
  let eePx: [number, number] | null = null;
  if (config && state) {
    const pts = chainPoints(config.chain, state.q);
    chainPx = pts.map(([x, y]) => worldToPx(x, y, vp));
    eePx = worldToPx(state.ee.x, state.ee.y, vp);
  }
  const targetPx = target ? worldToPx(target.x, target.y, vp) : null;
  return { chainPx, eePx, targetPx, stalled };
}
