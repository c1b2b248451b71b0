import { describe, expect, it } from "vitest";

import {
  apertureSet,
  BLUR_SCALE_MAX,
  BLUR_SCALE_MIN,
  clampBlurScale,
  clampFocal,
  focusPicked,
  historyReplayed,
  initialState,
  renderParams,
  sessionLoaded,
} from "../src/state.js";

describe("clamping", () => {
  it("keeps focal inside the service range", () => {
    expect(clampFocal(-0.5)).toBe(0);
    expect(clampFocal(0)).toBe(0);
    expect(clampFocal(0.37)).toBeCloseTo(0.37, 12);
    expect(clampFocal(1)).toBe(1);
    expect(clampFocal(1.5)).toBe(1);
    expect(clampFocal(Number.NaN)).toBe(0);
  });

  it("snaps the aperture to a positive range", () => {
    expect(clampBlurScale(0)).toBe(BLUR_SCALE_MIN);
    expect(clampBlurScale(-3)).toBe(BLUR_SCALE_MIN);
    expect(clampBlurScale(1)).toBe(1);
    expect(clampBlurScale(9)).toBe(BLUR_SCALE_MAX);
    expect(clampBlurScale(Number.NaN)).toBe(BLUR_SCALE_MIN);
  });

  it("maps slider zero below the identity collapse threshold", () => {
    expect(BLUR_SCALE_MIN).toBeLessThan(2 / 69);
  });
});

describe("session lifecycle", () => {
  it("starts without a session", () => {
    const state = initialState();
    expect(state.sessionId).toBeNull();
    expect(state.history).toHaveLength(0);
  });

  it("stores the session id and dimensions", () => {
    const state = sessionLoaded(initialState(), "abc", 640, 480);
    expect(state.sessionId).toBe("abc");
    expect(state.width).toBe(640);
    expect(state.height).toBe(480);
  });

  it("clears the history when a new session opens", () => {
    let state = sessionLoaded(initialState(), "abc", 64, 64);
    state = focusPicked(state, 0.2);
    state = sessionLoaded(state, "def", 64, 64);
    expect(state.history).toHaveLength(0);
  });
});

describe("interactions", () => {
  it("records a focus pick in the history", () => {
    const state = focusPicked(initialState(), 0.25);
    expect(state.focal).toBe(0.25);
    expect(state.history).toEqual([{ focal: 0.25, blurScale: 1 }]);
  });

  it("clamps out-of-range picks before recording them", () => {
    const state = focusPicked(initialState(), 1.7);
    expect(state.focal).toBe(1);
    expect(state.history[0]?.focal).toBe(1);
  });

  it("collapses repeated identical picks into one entry", () => {
    let state = focusPicked(initialState(), 0.25);
    state = focusPicked(state, 0.25);
    expect(state.history).toHaveLength(1);
  });

  it("records aperture changes", () => {
    let state = focusPicked(initialState(), 0.25);
    state = apertureSet(state, 2);
    expect(state.blurScale).toBe(2);
    expect(state.history).toEqual([
      { focal: 0.25, blurScale: 1 },
      { focal: 0.25, blurScale: 2 },
    ]);
  });

  it("clamps the aperture slider", () => {
    const state = apertureSet(initialState(), 0);
    expect(state.blurScale).toBe(BLUR_SCALE_MIN);
  });
});

describe("history replay", () => {
  it("restores prior parameters without appending", () => {
    let state = focusPicked(initialState(), 0.25);
    state = apertureSet(state, 2);
    state = focusPicked(state, 0.8);
    const replayed = historyReplayed(state, 0);
    expect(replayed.focal).toBe(0.25);
    expect(replayed.blurScale).toBe(1);
    expect(replayed.history).toHaveLength(3);
  });

  it("ignores out-of-range indices", () => {
    const state = focusPicked(initialState(), 0.25);
    expect(historyReplayed(state, 5)).toBe(state);
    expect(historyReplayed(state, -1)).toBe(state);
  });
});

describe("render parameters", () => {
  it("carries the current state and preview flag", () => {
    let state = focusPicked(initialState(), 0.3);
    state = apertureSet(state, 1.5);
    expect(renderParams(state, true)).toEqual({ focal: 0.3, blurScale: 1.5, preview: true });
    expect(renderParams(state, false).preview).toBe(false);
  });
});
