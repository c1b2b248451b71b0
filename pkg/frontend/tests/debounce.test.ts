import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce, isAbortError, LatestWins, PREVIEW_DEBOUNCE_MS } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("fires once per window with the latest arguments", () => {
    const seen: number[] = [];
    const bounced = debounce((value: number) => seen.push(value), 150);
    bounced.call(1);
    vi.advanceTimersByTime(50);
    bounced.call(2);
    vi.advanceTimersByTime(50);
    bounced.call(3);
    vi.advanceTimersByTime(149);
    expect(seen).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(seen).toEqual([3]);
  });

  it("fires again for calls in a later window", () => {
    const seen: number[] = [];
    const bounced = debounce((value: number) => seen.push(value), 150);
    bounced.call(1);
    vi.advanceTimersByTime(150);
    bounced.call(2);
    vi.advanceTimersByTime(150);
    expect(seen).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const seen: number[] = [];
    const bounced = debounce((value: number) => seen.push(value), 150);
    bounced.call(1);
    bounced.cancel();
    vi.advanceTimersByTime(300);
    expect(seen).toEqual([]);
  });

  it("defaults to the preview window", () => {
    expect(PREVIEW_DEBOUNCE_MS).toBe(150);
  });
});

describe("LatestWins", () => {
  it("aborts the previous signal when a new request begins", () => {
    const gate = new LatestWins();
    const first = gate.begin();
    expect(first.aborted).toBe(false);
    const second = gate.begin();
    expect(first.aborted).toBe(true);
    expect(second.aborted).toBe(false);
  });

  it("cancel aborts the outstanding signal", () => {
    const gate = new LatestWins();
    const signal = gate.begin();
    gate.cancel();
    expect(signal.aborted).toBe(true);
  });

  it("recognizes abort errors from fetch", async () => {
    const gate = new LatestWins();
    const signal = gate.begin();
    gate.begin();
    const error = await fetch("http://127.0.0.1:1/none", { signal }).then(
      () => null,
      (raised: unknown) => raised,
    );
    expect(isAbortError(error)).toBe(true);
    expect(isAbortError(new Error("boom"))).toBe(false);
  });
});
