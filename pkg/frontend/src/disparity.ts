/** Client-side disparity sampling so focus picks need no extra round trip. */

export interface DisparityField {
  readonly width: number;
  readonly height: number;
  /** Row-major values in [0, 1]. */
  readonly values: Float32Array;
}

/** Builds a field from decoded RGBA pixels of the defocus view at focal 0. */
export function fieldFromRgba(
  rgba: Uint8Array | Uint8ClampedArray,
  width: number,
  height: number,
): DisparityField {
  if (rgba.length !== width * height * 4) {
    throw new Error("pixel buffer does not match the given dimensions");
  }
  const values = new Float32Array(width * height);
  for (let i = 0; i < values.length; i += 1) {
    values[i] = (rgba[i * 4] as number) / 255;
  }
  return { width, height, values };
}

/** Reads the disparity under a pixel, clamping coordinates to the image. */
export function disparityAt(field: DisparityField, x: number, y: number): number {
  const col = Math.min(field.width - 1, Math.max(0, Math.round(x)));
  const row = Math.min(field.height - 1, Math.max(0, Math.round(y)));
  return field.values[row * field.width + col] as number;
}
