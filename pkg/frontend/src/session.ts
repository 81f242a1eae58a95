/** Session state machine and message plumbing.
 *
 * States: disconnected -> connected (config received) -> streaming; stop
 * returns to connected, socket loss to disconnected.  Message ingestion
 * only updates snapshots and rolling buffers; rendering reads them on its
 * own schedule and never queues behind the socket.
 */

import { RollingBuffer } from "./buffers";
import {
  ConfigMsg,
  Mode,
  ServerMsg,
  StateMsg,
  modeMsg,
  parseServerMsg,
  startMsg,
  stopMsg,
  targetPoseMsg,
} from "./protocol";
import { TargetThrottle } from "./throttle";

export type SessionPhase = "disconnected" | "connected" | "streaming";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((data: string) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export interface PathSample {
  t: number;
  x: number;
  y: number;
}

export interface AccelSample {
  t: number;
  abs: number[];
}

export interface SessionEvents {
  onPhase?: (phase: SessionPhase) => void;
  onConfig?: (config: ConfigMsg) => void;
  onModeAck?: (mode: Mode) => void;
  onError?: (message: string) => void;
}

export class ConsoleSession {
  phase: SessionPhase = "disconnected";
  config: ConfigMsg | null = null;
  latestState: StateMsg | null = null;
  lastStateWallMs = -Infinity;
  /** mode as acknowledged by the server; UI badge follows this, not clicks */
  ackedMode: Mode | null = null;
  target: { x: number; y: number } | null = null;

  readonly actualPath = new RollingBuffer<PathSample>(10.0);
  readonly targetPath = new RollingBuffer<PathSample>(10.0);
  readonly accel = new RollingBuffer<AccelSample>(10.0);

  private socket: SocketLike | null = null;
  private throttle: TargetThrottle<{ x: number; y: number }>;

  constructor(
    private readonly events: SessionEvents = {},
    targetRateHz = 20.0,
    private readonly wallNow: () => number = () => Date.now(),
  ) {
    this.throttle = new TargetThrottle(
      1000.0 / targetRateHz,
      (p) => this.socket?.send(targetPoseMsg(p.x, p.y)),
      this.wallNow,
    );
  }

  attach(socket: SocketLike): void {
    this.socket = socket;
    socket.onmessage = (data) => this.ingest(data);
    socket.onclose = () => this.setPhase("disconnected");
  }

  /** Raw message intake; malformed input is surfaced, never throws. */
  ingest(raw: string): void {
    let msg: ServerMsg;
    try {
      msg = parseServerMsg(raw);
    } catch (err) {
      this.events.onError?.(String(err));
      return;
    }
    switch (msg.type) {
      case "config":
        this.config = msg;
        this.ackedMode = (msg.mode as Mode) ?? null;
        if (this.phase === "disconnected") this.setPhase("connected");
        this.events.onConfig?.(msg);
        break;
      case "state": {
        this.latestState = msg;
        this.lastStateWallMs = this.wallNow();
        this.actualPath.push({ t: msg.t, x: msg.ee.x, y: msg.ee.y });
        if (this.target !== null) {
          this.targetPath.push({ t: msg.t, x: this.target.x, y: this.target.y });
        }
        this.accel.push({ t: msg.t, abs: msg.metrics.abs_accel });
        break;
      }
      case "ack":
        if (msg.what === "mode" && msg.value) {
          this.ackedMode = msg.value as Mode;
          this.events.onModeAck?.(msg.value as Mode);
        }
        break;
      case "error":
        this.events.onError?.(msg.message);
        break;
    }
  }

  start(): void {
    if (this.phase !== "connected") return;
    this.socket?.send(startMsg());
    this.setPhase("streaming");
  }

  /** Stop is reachable from any live phase. */
  stop(): void {
    if (this.phase === "disconnected") return;
    this.socket?.send(stopMsg());
    this.setPhase("connected");
  }

  requestMode(mode: Mode): void {
    this.socket?.send(modeMsg(mode));
  }

  /** Drag input; outbound rate is capped by the client-side throttle. */
  dragTarget(x: number, y: number): void {
    this.target = { x, y };
    if (this.phase === "streaming") {
      this.throttle.push({ x, y });
    }
  }

  stalled(nowMs: number = this.wallNow()): boolean {
    return this.phase === "streaming" && nowMs - this.lastStateWallMs > 500;
  }

  close(): void {
    this.throttle.dispose();
    this.socket?.close();
    this.setPhase("disconnected");
  }

  get sentTargets(): number {
    return this.throttle.sent;
  }

  private setPhase(phase: SessionPhase): void {
    if (phase !== this.phase) {
      this.phase = phase;
      this.events.onPhase?.(phase);
    }
  }
}
