/** Client-side rate limiting for drag-streamed targets.
 *
 * Leading-edge send with a trailing flush: intermediate drag samples are
 * dropped, the newest one always goes out once the interval elapses, and
 * the outbound rate never exceeds 1/intervalMs.
 */

export class TargetThrottle<T> {
  private lastSent = -Infinity;
  private pending: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  sent = 0;

  constructor(
    private readonly intervalMs: number,
    private readonly emit: (value: T) => void,
    private readonly now: () => number = () => Date.now(),
  ) {}

  push(value: T): void {
    const t = this.now();
    if (t - this.lastSent >= this.intervalMs) {
      this.fire(value, t);
      return;
    }
    this.pending = value;
    if (this.timer === null) {
      const wait = this.intervalMs - (t - this.lastSent);
      this.timer = setTimeout(() => this.flush(), wait);
    }
  }

  /** Deliver a stored trailing value (also called by the timer). */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pending !== null && this.now() - this.lastSent >= this.intervalMs) {
      const value = this.pending;
      this.fire(value, this.now());
    }
  }

  dispose(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.pending = null;
  }

  private fire(value: T, t: number): void {
    this.lastSent = t;
    this.pending = null;
    this.sent += 1;
    this.emit(value);
  }
}
