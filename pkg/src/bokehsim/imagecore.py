"""Image containers, file I/O, resampling, convolution, and differential operators."""

import io
import os
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

try:
    from bokehsim import _convcore
except ImportError:
    _convcore = None

try:
    from numba import njit
except ImportError:
    njit = None

CONV_MODES = ("reference", "optimized")

# Direct C correlation wins for small kernels, FFT for large ones.
_DIRECT_MAX_SIZE = 5


class ImageIOError(Exception):
    """Raised when an image file cannot be read or written."""


@dataclass(frozen=True, eq=False)
class PlanarImage:
    """Float64 raster of shape (height, width, channels) with 1 or 3 channels."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ValueError("image data must have 2 or 3 axes, got %d" % data.ndim)
        if data.shape[2] not in (1, 3):
            raise ValueError("channel count must be 1 or 3, got %d" % data.shape[2])
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must contain at least one pixel")
        if not np.all(np.isfinite(data)):
            raise ValueError("image data contains non-finite values")
        object.__setattr__(self, "data", np.ascontiguousarray(data))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @classmethod
    def full(cls, width, height, value, channels=3):
        """Constant image of the given size."""
        return cls(np.full((height, width, channels), value, dtype=np.float64))

    def plane(self, index):
        """Single channel as a (height, width) array."""
        return self.data[:, :, index]


@dataclass(frozen=True, eq=False)
class Kernel2D:
    """Square odd-sized convolution kernel."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.ascontiguousarray(np.asarray(self.taps, dtype=np.float64))
        if taps.ndim != 2 or taps.shape[0] != taps.shape[1]:
            raise ValueError("kernel taps must be square")
        if taps.shape[0] % 2 == 0:
            raise ValueError("kernel size must be odd, got %d" % taps.shape[0])
        if not np.all(np.isfinite(taps)):
            raise ValueError("kernel taps contain non-finite values")
        object.__setattr__(self, "taps", taps)

    @property
    def size(self):
        return self.taps.shape[0]

    @property
    def radius(self):
        return (self.taps.shape[0] - 1) // 2

    @property
    def normalized(self):
        return abs(float(self.taps.sum()) - 1.0) <= 1e-8


def _axis_lookup(n_src, n_dst):
    """Bilinear source indices and fractions for one axis, half-pixel centers."""
    scale = n_src / n_dst
    centers = (np.arange(n_dst, dtype=np.float64) + 0.5) * scale - 0.5
    centers = np.clip(centers, 0.0, n_src - 1.0)
    lo = np.floor(centers).astype(np.int64)
    frac = centers - lo
    hi = np.minimum(lo + 1, n_src - 1)
    return lo, hi, frac


def resize_bilinear(img, width, height):
    """Resample to the given size with bilinear filtering and clamped borders."""
    if width < 1 or height < 1:
        raise ValueError("target size must be positive")
    data = img.data
    ylo, yhi, yfrac = _axis_lookup(img.height, height)
    xlo, xhi, xfrac = _axis_lookup(img.width, width)
    rows_lo = data[ylo]
    rows = rows_lo + (data[yhi] - rows_lo) * yfrac[:, None, None]
    cols_lo = rows[:, xlo]
    out = cols_lo + (rows[:, xhi] - cols_lo) * xfrac[None, :, None]
    return PlanarImage(out)


def laplacian(img):
    """Four-neighbor Laplacian with replicated borders."""
    padded = np.pad(img.data, ((1, 1), (1, 1), (0, 0)), mode="edge")
    out = (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * img.data
    )
    return PlanarImage(out)


def _shift_adjoint(values, axis, step):
    """Adjoint of clamped neighbor sampling along one axis."""
    n = values.shape[axis]
    if n == 1:
        return values.copy()
    out = np.zeros_like(values)
    take = [slice(None)] * values.ndim
    put = [slice(None)] * values.ndim
    edge = [slice(None)] * values.ndim
    if step < 0:
        put[axis] = slice(0, n - 1)
        take[axis] = slice(1, n)
        edge[axis] = 0
    else:
        put[axis] = slice(1, n)
        take[axis] = slice(0, n - 1)
        edge[axis] = n - 1
    out[tuple(put)] = values[tuple(take)]
    out[tuple(edge)] += values[tuple(edge)]
    return out


def laplacian_adjoint(img):
    """Exact adjoint of the replicated-border Laplacian."""
    data = img.data
    out = -4.0 * data
    for axis in (0, 1):
        for step in (-1, 1):
            out = out + _shift_adjoint(data, axis, step)
    return PlanarImage(out)


def gradients_xy(img):
    """Forward differences along x and y, zero on the trailing column and row."""
    data = img.data
    gx = np.zeros_like(data)
    gy = np.zeros_like(data)
    gx[:, :-1] = data[:, 1:] - data[:, :-1]
    gy[:-1, :] = data[1:] - data[:-1]
    return PlanarImage(gx), PlanarImage(gy)


def _correlate_plane_py(plane, taps, out):
    height, width = plane.shape
    size = taps.shape[0]
    radius = (size - 1) // 2
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for i in range(size):
                yy = y + i - radius
                if yy < 0:
                    yy = 0
                elif yy >= height:
                    yy = height - 1
                for j in range(size):
                    xx = x + j - radius
                    if xx < 0:
                        xx = 0
                    elif xx >= width:
                        xx = width - 1
                    acc += taps[i, j] * plane[yy, xx]
            out[y, x] = acc
    return out


if njit is not None:
    _correlate_plane_ref = njit(cache=True)(_correlate_plane_py)
else:
    _correlate_plane_ref = _correlate_plane_py


def _correlate_plane_fft(plane, taps):
    radius = (taps.shape[0] - 1) // 2
    padded = np.pad(plane, radius, mode="edge")
    return fftconvolve(padded, taps[::-1, ::-1], mode="valid")


def conv_backend():
    """Name of the optimized convolution backend selected at import."""
    return "compiled" if _convcore is not None else "numpy"


def _conv_optimized(plane, taps):
    forced = os.environ.get("BOKEHSIM_CONV_BACKEND", "auto")
    if forced == "numpy":
        return _correlate_plane_fft(plane, taps)
    if forced == "compiled":
        if _convcore is None:
            raise RuntimeError("compiled convolution backend is not available")
        return _convcore.correlate2d_replicate(plane, taps)
    if _convcore is not None and taps.shape[0] <= _DIRECT_MAX_SIZE:
        return _convcore.correlate2d_replicate(plane, taps)
    return _correlate_plane_fft(plane, taps)


def convolve(img, kernel, mode="optimized"):
    """Correlate with a normalized kernel, replicating borders.

    Kernels are applied unflipped; every kernel produced by the bank builders
    is symmetric, so correlation and convolution coincide.
    """
    if mode not in CONV_MODES:
        raise ValueError("unknown convolution mode %r" % (mode,))
    if not kernel.normalized:
        raise ValueError("kernel taps must sum to 1")
    taps = kernel.taps
    if kernel.size == 1:
        return PlanarImage(img.data * taps[0, 0])
    out = np.empty_like(img.data)
    for c in range(img.channels):
        plane = np.ascontiguousarray(img.data[:, :, c])
        if mode == "reference":
            out[:, :, c] = _correlate_plane_ref(plane, taps, np.empty_like(plane))
        else:
            out[:, :, c] = _conv_optimized(plane, taps)
    return PlanarImage(out)


def _quantize(data, levels):
    return np.clip(np.rint(data * levels), 0, levels).astype(np.uint32)


def _decode_with_pil(source, label, kind):
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(source) as handle:
            handle.load()
            mode = handle.mode
            arr = np.asarray(handle)
    except FileNotFoundError as exc:
        raise ImageIOError("cannot read %s: %s" % (label, exc)) from exc
    except UnidentifiedImageError as exc:
        raise ImageIOError("malformed image file %s" % label) from exc
    except OSError as exc:
        raise ImageIOError("cannot read %s: %s" % (label, exc)) from exc
    if kind == "rgb8":
        if mode != "RGB" or arr.dtype != np.uint8:
            raise ImageIOError("%s: expected 8-bit RGB, got mode %s" % (label, mode))
        return PlanarImage(arr.astype(np.float64) / 255.0)
    if mode not in ("I", "I;16") or arr.dtype not in (np.uint16, np.int32):
        raise ImageIOError("%s: expected 16-bit grayscale, got mode %s" % (label, mode))
    arr = arr.astype(np.float64)
    if arr.min() < 0 or arr.max() > 65535:
        raise ImageIOError("%s: sample values outside 16-bit range" % label)
    return PlanarImage((arr / 65535.0)[:, :, None])


def load_image(path, kind):
    """Load rgb8, gray16, or pfm image data as a PlanarImage in [0, 1] or raw floats."""
    if kind == "pfm":
        return _load_pfm(path)
    if kind not in ("rgb8", "gray16"):
        raise ValueError("unknown image kind %r" % (kind,))
    return _decode_with_pil(path, path, kind)


def decode_image(data, kind):
    """Decode in-memory rgb8, gray16, or pfm image bytes into a PlanarImage."""
    label = "<bytes>"
    if kind == "pfm":
        return _decode_pfm(io.BytesIO(data), label)
    if kind not in ("rgb8", "gray16"):
        raise ValueError("unknown image kind %r" % (kind,))
    return _decode_with_pil(io.BytesIO(data), label, kind)


def _to_pil(img, kind):
    from PIL import Image

    if kind == "rgb8":
        if img.channels != 3:
            raise ValueError("rgb8 output requires 3 channels")
        return Image.fromarray(_quantize(img.data, 255).astype(np.uint8), mode="RGB")
    if kind == "gray16":
        if img.channels != 1:
            raise ValueError("gray16 output requires 1 channel")
        return Image.fromarray(_quantize(img.plane(0), 65535).astype(np.uint16))
    raise ValueError("unknown image kind %r" % (kind,))


def save_image(path, img, kind):
    """Write a PlanarImage as rgb8, gray16, or pfm."""
    if kind == "pfm":
        _save_pfm(path, img)
        return
    pil = _to_pil(img, kind)
    try:
        pil.save(path)
    except OSError as exc:
        raise ImageIOError("cannot write %s: %s" % (path, exc)) from exc


def encode_image(img, kind):
    """Encode a PlanarImage as PNG bytes (rgb8 or gray16)."""
    buffer = io.BytesIO()
    _to_pil(img, kind).save(buffer, format="PNG")
    return buffer.getvalue()


def _read_token(stream):
    token = b""
    while True:
        byte = stream.read(1)
        if not byte:
            raise ImageIOError("truncated pfm header")
        if byte.isspace():
            if token:
                return token
            continue
        token += byte


def _decode_pfm(stream, label):
    magic = _read_token(stream)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise ImageIOError("%s: not a pfm file" % label)
    try:
        width = int(_read_token(stream))
        height = int(_read_token(stream))
        scale = float(_read_token(stream))
    except ValueError as exc:
        raise ImageIOError("%s: malformed pfm header" % label) from exc
    if width < 1 or height < 1 or scale == 0:
        raise ImageIOError("%s: malformed pfm header" % label)
    count = width * height * channels
    raw = stream.read(count * 4)
    if len(raw) != count * 4:
        raise ImageIOError("%s: truncated pfm payload" % label)
    endian = "<" if scale < 0 else ">"
    samples = np.frombuffer(raw, dtype=endian + "f4").astype(np.float64)
    samples = samples.reshape(height, width, channels) * abs(scale)
    samples = np.flipud(samples)
    if not np.all(np.isfinite(samples)):
        raise ImageIOError("%s: non-finite pfm samples" % label)
    return PlanarImage(samples)


def _load_pfm(path):
    try:
        stream = open(path, "rb")
    except OSError as exc:
        raise ImageIOError("cannot read %s: %s" % (path, exc)) from exc
    with stream:
        return _decode_pfm(stream, path)


def _save_pfm(path, img):
    if img.channels == 3:
        magic = b"PF"
    else:
        magic = b"Pf"
    payload = np.flipud(img.data).astype("<f4")
    if img.channels == 1:
        payload = payload[:, :, 0]
    try:
        with open(path, "wb") as stream:
            stream.write(magic + b"\n")
            stream.write(b"%d %d\n" % (img.width, img.height))
            stream.write(b"-1.0\n")
            stream.write(payload.tobytes())
    except OSError as exc:
        raise ImageIOError("cannot write %s: %s" % (path, exc)) from exc
