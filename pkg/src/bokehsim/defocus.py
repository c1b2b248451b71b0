"""Defocus maps from disparity: magnitude, thresholding, and layer membership."""

from dataclasses import dataclass

import numpy as np

from bokehsim.imagecore import PlanarImage, gradients_xy, resize_bilinear

NORMALIZE_MODES = ("fixed_range", "max_abs")


@dataclass(frozen=True, eq=False)
class SignedDefocus:
    """Disparity offset from the focal plane, with the focal value attached."""

    data: np.ndarray
    focal: float

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 2:
            raise ValueError("signed defocus must be a single plane")
        if not np.all(np.isfinite(data)):
            raise ValueError("signed defocus contains non-finite values")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True, eq=False)
class DefocusMap:
    """Normalized blur amount per pixel, in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 2:
            raise ValueError("defocus map must be a single plane")
        if not np.all(np.isfinite(data)):
            raise ValueError("defocus map contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("defocus values must lie in [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


def signed_defocus(disparity, focal):
    """Signed distance of each disparity sample from the focal plane."""
    if not 0.0 <= focal <= 1.0:
        raise ValueError("focal must lie in [0, 1]")
    plane = disparity.plane(0) if isinstance(disparity, PlanarImage) else np.asarray(disparity)
    plane = np.asarray(plane, dtype=np.float64)
    if plane.min() < 0.0 or plane.max() > 1.0:
        raise ValueError("disparity values must lie in [0, 1]")
    return SignedDefocus(data=plane - focal, focal=float(focal))


def defocus_magnitude(signed, normalize="fixed_range"):
    """Normalized defocus amount from a signed defocus map."""
    if normalize not in NORMALIZE_MODES:
        raise ValueError("unknown normalize mode %r" % (normalize,))
    magnitude = np.abs(signed.data)
    if normalize == "fixed_range":
        span = max(signed.focal, 1.0 - signed.focal)
        return DefocusMap(magnitude / span)
    peak = magnitude.max()
    if peak == 0.0:
        return DefocusMap(np.zeros_like(magnitude))
    return DefocusMap(magnitude / peak)


def binary_mask(defocus, theta):
    """In-focus indicator: 1 where defocus is below the threshold."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly inside (0, 1)")
    return (defocus.data < theta).astype(np.float64)


def _stable_sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def layer_masks(defocus, layers=15, gamma=100.0):
    """Soft membership of each pixel in every depth layer.

    The mask of layer l peaks where defocus equals l / layers and falls off
    with a tanh of steepness gamma; it stays strictly inside (0, 1).
    """
    if layers < 1:
        raise ValueError("layer count must be positive")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    centers = np.arange(1, layers + 1, dtype=np.float64) / layers
    distance = np.abs(defocus.data[None, :, :] - centers[:, None, None])
    return _stable_sigmoid(2.0 * gamma * (1.0 / layers - distance))


def defocus_smoothness(defocus, img, scales=4):
    """Multi-scale edge-aware total variation of a defocus map.

    At each scale the defocus gradients are attenuated where the image has
    strong gradients, then averaged; scale contributions are summed.
    """
    if scales < 1:
        raise ValueError("scale count must be positive")
    level_d = PlanarImage(defocus.data[:, :, None])
    level_i = img
    total = 0.0
    for _ in range(scales):
        gx_d, gy_d = gradients_xy(level_d)
        gx_i, gy_i = gradients_xy(level_i)
        weight_x = np.exp(-np.abs(gx_i.data).sum(axis=2))
        weight_y = np.exp(-np.abs(gy_i.data).sum(axis=2))
        term = np.abs(gx_d.plane(0)) * weight_x + np.abs(gy_d.plane(0)) * weight_y
        total += float(term.mean())
        width = max(1, level_d.width // 2)
        height = max(1, level_d.height // 2)
        level_d = resize_bilinear(level_d, width, height)
        level_i = resize_bilinear(level_i, width, height)
    return total
