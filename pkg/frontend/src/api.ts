/** Thin typed client for the bokehsim HTTP service. */

import type { RenderParams } from "./state.js";

export interface SessionInfo {
  readonly id: string;
  readonly width: number;
  readonly height: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) {
    return;
  }
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // Non-JSON error bodies fall back to the status line.
  }
  throw new Error(detail);
}

export class BokehClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** Uploads an image plus disparity pair and opens a render session. */
  async createSession(image: Blob, disparity: Blob): Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", image, "image.png");
    form.append("disparity", disparity, "disparity.png");
    const response = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(response);
    return (await response.json()) as SessionInfo;
  }

  /** Renders the session at the given parameters and returns PNG bytes. */
  async render(
    sessionId: string,
    params: RenderParams,
    signal?: AbortSignal,
  ): Promise<ArrayBuffer> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/render`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        focal: params.focal,
        blur_scale: params.blurScale,
        preview: params.preview,
      }),
      signal,
    });
    await raiseForStatus(response);
    return response.arrayBuffer();
  }

  /** Fetches the defocus visualization as 16-bit grayscale PNG bytes. */
  async defocusView(
    sessionId: string,
    focal: number,
    signal?: AbortSignal,
  ): Promise<ArrayBuffer> {
    const url = `${this.baseUrl}/sessions/${sessionId}/defocus?focal=${focal}`;
    const response = await this.fetchFn(url, { method: "GET", signal });
    await raiseForStatus(response);
    return response.arrayBuffer();
  }
}
