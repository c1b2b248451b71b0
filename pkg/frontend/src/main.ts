/** DOM glue: wires the pure state, API client, and scheduling together. */

import { BokehClient } from "./api.js";
import { debounce, isAbortError, LatestWins, PREVIEW_DEBOUNCE_MS } from "./debounce.js";
import { disparityAt, fieldFromRgba, type DisparityField } from "./disparity.js";
import {
  apertureSet,
  focusPicked,
  historyReplayed,
  initialState,
  renderParams,
  sessionLoaded,
  type UiState,
} from "./state.js";

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const imageInput = element<HTMLInputElement>("image-file");
const disparityInput = element<HTMLInputElement>("disparity-file");
const openButton = element<HTMLButtonElement>("open-session");
const fullButton = element<HTMLButtonElement>("full-quality");
const apertureSlider = element<HTMLInputElement>("aperture");
const viewCanvas = element<HTMLCanvasElement>("view");
const historyList = element<HTMLOListElement>("history");
const statusLine = element<HTMLElement>("status");

// Same-origin by default; `?service=http://host:port` targets a remote service.
const serviceBase = new URLSearchParams(window.location.search).get("service") ?? "";
const client = new BokehClient(serviceBase);
const inFlight = new LatestWins();
let state: UiState = initialState();
let field: DisparityField | null = null;

function setStatus(text: string): void {
  statusLine.textContent = text;
}

async function decodeToCanvas(bytes: ArrayBuffer, canvas: HTMLCanvasElement): Promise<void> {
  const bitmap = await createImageBitmap(new Blob([bytes], { type: "image/png" }));
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const context = canvas.getContext("2d");
  if (context === null) {
    throw new Error("canvas 2d context unavailable");
  }
  context.drawImage(bitmap, 0, 0);
  bitmap.close();
}

function renderHistory(): void {
  historyList.replaceChildren();
  state.history.forEach((entry, index) => {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `focal ${entry.focal.toFixed(3)}, aperture ${entry.blurScale.toFixed(2)}`;
    button.addEventListener("click", () => {
      state = historyReplayed(state, index);
      requestRender(true);
    });
    item.append(button);
    historyList.append(item);
  });
}

async function requestRender(preview: boolean): Promise<void> {
  if (state.sessionId === null) {
    return;
  }
  const params = renderParams(state, preview);
  const signal = inFlight.begin();
  setStatus(preview ? "rendering preview..." : "rendering full quality...");
  try {
    const bytes = await client.render(state.sessionId, params, signal);
    await decodeToCanvas(bytes, viewCanvas);
    setStatus(
      `focal ${params.focal.toFixed(3)}, aperture ${params.blurScale.toFixed(2)}` +
        (preview ? " (preview)" : " (full quality)"),
    );
    renderHistory();
  } catch (error) {
    if (!isAbortError(error)) {
      setStatus(error instanceof Error ? error.message : String(error));
    }
  }
}

const debouncedPreview = debounce(() => {
  void requestRender(true);
}, PREVIEW_DEBOUNCE_MS);

async function loadDisparityField(sessionId: string): Promise<DisparityField> {
  const bytes = await client.defocusView(sessionId, 0);
  const scratch = document.createElement("canvas");
  await decodeToCanvas(bytes, scratch);
  const context = scratch.getContext("2d");
  if (context === null) {
    throw new Error("canvas 2d context unavailable");
  }
  const pixels = context.getImageData(0, 0, scratch.width, scratch.height);
  return fieldFromRgba(pixels.data, pixels.width, pixels.height);
}

openButton.addEventListener("click", () => {
  void (async () => {
    const image = imageInput.files?.[0];
    const disparity = disparityInput.files?.[0];
    if (image === undefined || disparity === undefined) {
      setStatus("choose an image and a disparity map first");
      return;
    }
    try {
      setStatus("uploading...");
      const info = await client.createSession(image, disparity);
      state = sessionLoaded(state, info.id, info.width, info.height);
      field = await loadDisparityField(info.id);
      renderHistory();
      await requestRender(true);
    } catch (error) {
      setStatus(error instanceof Error ? error.message : String(error));
    }
  })();
});

viewCanvas.addEventListener("click", (event) => {
  if (field === null) {
    return;
  }
  const bounds = viewCanvas.getBoundingClientRect();
  const x = ((event.clientX - bounds.left) / bounds.width) * field.width;
  const y = ((event.clientY - bounds.top) / bounds.height) * field.height;
  state = focusPicked(state, disparityAt(field, x, y));
  debouncedPreview.call();
});

apertureSlider.addEventListener("input", () => {
  state = apertureSet(state, Number(apertureSlider.value));
  debouncedPreview.call();
});

fullButton.addEventListener("click", () => {
  debouncedPreview.cancel();
  void requestRender(false);
});

setStatus("choose an image and a disparity map, then open a session");
