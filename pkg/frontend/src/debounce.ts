/** Trailing-edge debouncing and latest-wins request cancellation. */

export const PREVIEW_DEBOUNCE_MS = 150;

export interface Debounced<T extends unknown[]> {
  call(...args: T): void;
  cancel(): void;
}

/** Coalesces rapid calls; only the last one within the window fires. */
export function debounce<T extends unknown[]>(
  fn: (...args: T) => void,
  ms: number = PREVIEW_DEBOUNCE_MS,
): Debounced<T> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return {
    call(...args: T): void {
      if (timer !== null) {
        clearTimeout(timer);
      }
      timer = setTimeout(() => {
        timer = null;
        fn(...args);
      }, ms);
    },
    cancel(): void {
      if (timer !== null) {
        clearTimeout(timer);
        timer = null;
      }
    },
  };
}

/** Hands out abort signals, cancelling the previous request each time. */
export class LatestWins {
  private controller: AbortController | null = null;

  begin(): AbortSignal {
    if (this.controller !== null) {
      this.controller.abort();
    }
    this.controller = new AbortController();
    return this.controller.signal;
  }

  cancel(): void {
    if (this.controller !== null) {
      this.controller.abort();
      this.controller = null;
    }
  }
}

/** True for errors raised by an aborted fetch, which the UI ignores. */
export function isAbortError(error: unknown): boolean {
  return (
    typeof error === "object" &&
    error !== null &&
    (error as { name?: unknown }).name === "AbortError"
  );
}
