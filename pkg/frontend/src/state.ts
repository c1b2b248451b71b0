/** Pure UI state and reducers; all interaction logic lives here, DOM-free. */

export const FOCAL_MIN = 0;
export const FOCAL_MAX = 1;
/** Slider zero maps to the smallest scale that collapses every kernel to identity. */
export const BLUR_SCALE_MIN = 0.02;
export const BLUR_SCALE_MAX = 4;

export interface HistoryEntry {
  readonly focal: number;
  readonly blurScale: number;
}

export interface RenderParams {
  readonly focal: number;
  readonly blurScale: number;
  readonly preview: boolean;
}

export interface UiState {
  readonly sessionId: string | null;
  readonly width: number;
  readonly height: number;
  readonly focal: number;
  readonly blurScale: number;
  readonly history: readonly HistoryEntry[];
}

export function initialState(): UiState {
  return {
    sessionId: null,
    width: 0,
    height: 0,
    focal: 0.5,
    blurScale: 1,
    history: [],
  };
}

/** Clamps a focal request into the range the service accepts. */
export function clampFocal(value: number): number {
  if (!Number.isFinite(value)) {
    return FOCAL_MIN;
  }
  return Math.min(FOCAL_MAX, Math.max(FOCAL_MIN, value));
}

/** Clamps an aperture request; zero and below snap to the identity scale. */
export function clampBlurScale(value: number): number {
  if (!Number.isFinite(value)) {
    return BLUR_SCALE_MIN;
  }
  return Math.min(BLUR_SCALE_MAX, Math.max(BLUR_SCALE_MIN, value));
}

export function sessionLoaded(
  state: UiState,
  sessionId: string,
  width: number,
  height: number,
): UiState {
  return { ...state, sessionId, width, height, history: [] };
}

function sameEntry(a: HistoryEntry, b: HistoryEntry): boolean {
  return a.focal === b.focal && a.blurScale === b.blurScale;
}

function pushHistory(state: UiState): UiState {
  const entry: HistoryEntry = { focal: state.focal, blurScale: state.blurScale };
  const last = state.history[state.history.length - 1];
  if (last !== undefined && sameEntry(last, entry)) {
    return state;
  }
  return { ...state, history: [...state.history, entry] };
}

/** Focuses on a picked disparity value and records the interaction. */
export function focusPicked(state: UiState, disparity: number): UiState {
  return pushHistory({ ...state, focal: clampFocal(disparity) });
}

/** Applies an aperture slider value and records the interaction. */
export function apertureSet(state: UiState, slider: number): UiState {
  return pushHistory({ ...state, blurScale: clampBlurScale(slider) });
}

/** Restores the parameters of a prior interaction without growing the history. */
export function historyReplayed(state: UiState, index: number): UiState {
  const entry = state.history[index];
  if (entry === undefined) {
    return state;
  }
  return { ...state, focal: entry.focal, blurScale: entry.blurScale };
}

/** Builds the request body for the current parameters. */
export function renderParams(state: UiState, preview: boolean): RenderParams {
  return { focal: state.focal, blurScale: state.blurScale, preview };
}
