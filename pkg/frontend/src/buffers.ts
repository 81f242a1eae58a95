/** Time-bounded rolling buffers for chart history. */

export interface Timed {
  t: number;
}

export class RollingBuffer<T extends Timed> {
  private items: T[] = [];

  constructor(readonly windowS: number = 10.0) {}

  push(item: T): void {
    this.items.push(item);
    const cutoff = item.t - this.windowS;
    let drop = 0;
    while (drop < this.items.length && this.items[drop].t < cutoff) {
      drop += 1;
    }
    if (drop > 0) {
      this.items.splice(0, drop);
    }
  }

  get length(): number {
    return this.items.length;
  }

  get span(): number {
    if (this.items.length < 2) return 0;
    return this.items[this.items.length - 1].t - this.items[0].t;
  }

  view(): readonly T[] {
    return this.items;
  }

  latest(): T | null {
    return this.items.length ? this.items[this.items.length - 1] : null;
  }

  clear(): void {
    this.items = [];
  }
}
