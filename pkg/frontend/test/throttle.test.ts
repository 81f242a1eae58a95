import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { TargetThrottle } from "../src/throttle";

describe("TargetThrottle", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("never exceeds the configured rate", () => {
    const sent: number[] = [];
    const throttle = new TargetThrottle<number>(50, (v) => sent.push(v));
    // 100 drag samples over one second (10 ms apart)
    for (let k = 0; k < 100; k++) {
      throttle.push(k);
      vi.advanceTimersByTime(10);
    }
    expect(sent.length).toBeLessThanOrEqual(21); // <= 20 Hz over 1 s
    expect(sent.length).toBeGreaterThanOrEqual(19);
  });

  it("delivers the newest value as a trailing send", () => {
    const sent: number[] = [];
    const throttle = new TargetThrottle<number>(50, (v) => sent.push(v));
    throttle.push(1); // leading edge
    throttle.push(2);
    throttle.push(3); // newest pending
    expect(sent).toEqual([1]);
    vi.advanceTimersByTime(55);
    expect(sent).toEqual([1, 3]); // intermediate 2 was dropped
  });

  it("sends immediately after a quiet period", () => {
    const sent: number[] = [];
    const throttle = new TargetThrottle<number>(50, (v) => sent.push(v));
    throttle.push(1);
    vi.advanceTimersByTime(500);
    throttle.push(2);
    expect(sent).toEqual([1, 2]);
  });

  it("dispose cancels pending sends", () => {
    const sent: number[] = [];
    const throttle = new TargetThrottle<number>(50, (v) => sent.push(v));
    throttle.push(1);
    throttle.push(2);
    throttle.dispose();
    vi.advanceTimersByTime(200);
    expect(sent).toEqual([1]);
  });
});
