/** Criterion-level session check against the real bridge service.
 *
 * Spawns the Python bridge on a planar 2-link config, then drives a
 * ConsoleSession over a real WebSocket: drag-streamed targets at <= 20 Hz,
 * state broadcasts at >= 55/s, mode toggle acknowledged, and the
 * precise/rapid contrast visible in the end-effector path (time to a
 * jumped target).
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { connect } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleSession, SocketLike } from "../src/session";

const PYTHON = process.env.PYTHON ?? "python3";
const REPO = resolve(__dirname, "..", "..");
const PORT = 18000 + Math.floor(Math.random() * 10000);

let server: ChildProcess;

function waitForPort(port: number, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  return new Promise((resolvePort, reject) => {
    const attempt = () => {
      const sock = connect(port, "127.0.0.1");
      sock.once("connect", () => {
        sock.destroy();
        resolvePort();
      });
      sock.once("error", () => {
        sock.destroy();
        if (Date.now() > deadline) reject(new Error("bridge did not come up"));
        else setTimeout(attempt, 150);
      });
    };
    attempt();
  });
}

function wrapNodeWs(url: string): Promise<SocketLike> {
  return new Promise((resolveWs, reject) => {
    const ws = new WebSocket(url);
    const like: SocketLike = {
      send: (data) => ws.readyState === WebSocket.OPEN && ws.send(data),
      close: () => ws.close(),
      onmessage: null,
      onclose: null,
      onopen: null,
    };
    ws.on("message", (data) => like.onmessage?.(data.toString()));
    ws.on("close", () => like.onclose?.());
    ws.on("open", () => resolveWs(like));
    ws.on("error", reject);
  });
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

beforeAll(async () => {
  const tmp = mkdtempSync(join(tmpdir(), "uttg-console-"));
  const configPath = join(tmp, "planar.json");
  execFileSync(PYTHON, [
    "-m",
    "uttg.cli",
    "gen-config",
    join(REPO, "tests", "fixtures", "planar_2link.urdf"),
    "--base",
    "base_link",
    "--tip",
    "tool",
    "-o",
    configPath,
    "--accel-scale",
    "2.0",
  ]);
  server = spawn(
    PYTHON,
    ["-m", "uttg.cli", "serve", "--config", configPath, "--port", String(PORT), "--ui-rate", "60"],
    { stdio: "inherit" },
  );
  await waitForPort(PORT);
}, 40000);

afterAll(() => {
  server?.kill();
});

async function settleTime(
  session: ConsoleSession,
  target: { x: number; y: number },
  drive: (t: number) => { x: number; y: number },
  durationS: number,
  tol = 0.06,
): Promise<number> {
  const t0 = Date.now();
  let lastOutside = 0;
  while (Date.now() - t0 < durationS * 1000) {
    const t = (Date.now() - t0) / 1000;
    const p = drive(t);
    session.dragTarget(p.x, p.y);
    const ee = session.latestState?.ee;
    if (ee) {
      const err = Math.hypot(ee.x - target.x, ee.y - target.y);
      if (err > tol) lastOutside = t;
    }
    await sleep(10); // 100 Hz drag; the throttle caps the wire rate
  }
  return lastOutside;
}

describe("live console session", () => {
  it(
    "streams, rates, acks, and shows the mode contrast",
    async () => {
      const errors: string[] = [];
      const acks: string[] = [];
      const session = new ConsoleSession({
        onError: (m) => errors.push(m),
        onModeAck: (m) => acks.push(m),
      });
      const socket = await wrapNodeWs(`ws://127.0.0.1:${PORT}`);
      session.attach(socket);
      await sleep(300);
      expect(session.phase).toBe("connected");
      expect(session.config?.dof).toBe(2);

      session.start();
      expect(session.phase).toBe("streaming");

      // --- broadcast rate: >= 55 state messages per second at 60 Hz
      const home = { x: 1.8, y: 0.3 };
      session.dragTarget(home.x, home.y);
      const sentBefore = session.sentTargets;
      const statesBefore = session.actualPath.length;
      const t0 = Date.now();
      while (Date.now() - t0 < 2000) {
        session.dragTarget(home.x + 0.001 * Math.random(), home.y);
        await sleep(10);
      }
      const elapsed = (Date.now() - t0) / 1000;
      const stateRate = (session.actualPath.length - statesBefore) / elapsed;
      const targetRate = (session.sentTargets - sentBefore) / elapsed;
      expect(stateRate).toBeGreaterThanOrEqual(55);
      expect(targetRate).toBeLessThanOrEqual(20.5);

      // --- mode toggle acknowledged
      session.requestMode("rapid");
      await sleep(300);
      expect(acks).toContain("rapid");
      expect(session.ackedMode).toBe("rapid");

      // --- behavioral contrast: time to a jumped target while the stream
      // wiggles; rapid skips the stale backlog, precise replays it
      const jump = { x: -1.0, y: 1.4 };
      const wiggleDrive = (t: number) => {
        const decay = Math.max(0, 1 - t / 2.0);
        return {
          x: jump.x + 0.1 * decay * Math.sin(2 * Math.PI * 1.0 * t),
          y: jump.y + 0.1 * decay * Math.cos(2 * Math.PI * 1.0 * t),
        };
      };

      const rehome = async () => {
        const tr = Date.now();
        while (Date.now() - tr < 2500) {
          session.dragTarget(home.x, home.y);
          await sleep(25);
        }
      };

      await rehome();
      const rapidSettle = await settleTime(session, jump, wiggleDrive, 5.0);

      session.requestMode("precise");
      await sleep(300);
      expect(session.ackedMode).toBe("precise");
      await rehome();
      const preciseSettle = await settleTime(session, jump, wiggleDrive, 5.0);

      expect(rapidSettle).toBeLessThan(preciseSettle);

      // path overlay data exists for both legs
      expect(session.targetPath.length).toBeGreaterThan(10);
      expect(session.actualPath.length).toBeGreaterThan(10);

      session.stop();
      expect(session.phase).toBe("connected");
      session.close();
    },
    60000,
  );
});
