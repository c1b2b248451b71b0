"""Sharp/blur compositing: fusion masks, Poisson-guided refinement, pyramid blending."""

from dataclasses import dataclass, field

import numpy as np

from bokehsim.defocus import binary_mask
from bokehsim.imagecore import (
    PlanarImage,
    convolve,
    laplacian,
    laplacian_adjoint,
    resize_bilinear,
)
from bokehsim.kernels import gaussian_kernel

FUSION_METHODS = ("binary", "feathered", "laplacian_pyramid", "poisson_optimized")

_GRAD_FLOOR = 1e-14
_BACKTRACK_LIMIT = 30


@dataclass(frozen=True)
class FusionConfig:
    """Settings for fusing the sharp image with the upsampled bokeh."""

    theta: float = 0.25
    zeta: float = 10.0
    feather_radius: int = 5
    method: str = "poisson_optimized"
    steps: int = 200
    lr: float = 0.05
    levels: int = 4

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie strictly inside (0, 1)")
        if self.zeta < 0:
            raise ValueError("zeta must be non-negative")
        if self.feather_radius < 1:
            raise ValueError("feather radius must be at least 1")
        if self.method not in FUSION_METHODS:
            raise ValueError("unknown fusion method %r" % (self.method,))
        if self.steps < 0:
            raise ValueError("step count must be non-negative")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.levels < 1:
            raise ValueError("pyramid level count must be at least 1")


@dataclass(frozen=True, eq=False)
class FusionMask:
    """Per-pixel blend weight of the sharp image, with optimizer diagnostics."""

    data: np.ndarray
    loss_trace: tuple = ()

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 2:
            raise ValueError("fusion mask must be a single plane")
        if not np.all(np.isfinite(data)):
            raise ValueError("fusion mask contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("fusion mask values must lie in [0, 1]")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "loss_trace", tuple(float(v) for v in self.loss_trace))


def _mask_data(mask):
    return mask.data if isinstance(mask, FusionMask) else np.asarray(mask, dtype=np.float64)


def _check_pair(img, bokeh_up):
    if img.data.shape != bokeh_up.data.shape:
        raise ValueError("sharp image and upsampled bokeh must have equal shapes")


def fuse(img, bokeh_up, mask):
    """Blend the sharp image and the upsampled bokeh with a per-pixel mask."""
    _check_pair(img, bokeh_up)
    weights = _mask_data(mask)
    if weights.shape != img.data.shape[:2]:
        raise ValueError("mask size does not match the images")
    weights = weights[:, :, None]
    return PlanarImage(weights * img.data + (1.0 - weights) * bokeh_up.data)


def build_target(img, bokeh_up, mask):
    """Compose the optimization target: sharp pixels inside the binary in-focus mask."""
    _check_pair(img, bokeh_up)
    weights = _mask_data(mask)
    if not np.all((weights == 0.0) | (weights == 1.0)):
        raise ValueError("target composition requires a strictly binary mask")
    return fuse(img, bokeh_up, weights)


def blend_binary(img, bokeh_up, mask):
    """Hard composite: sharp pixels where the binary mask is 1, bokeh elsewhere."""
    return build_target(img, bokeh_up, mask)


def poisson_loss(target, rendered):
    """Mean squared Laplacian difference, scaled by 1 / (2 H W) per channel."""
    if target.data.shape != rendered.data.shape:
        raise ValueError("loss operands must have equal shapes")
    diff = laplacian(target).data - laplacian(rendered).data
    per_channel = np.square(diff).sum(axis=(0, 1)) / (2.0 * target.height * target.width)
    return float(per_channel.mean())


def feathered_mask(binary, radius=5):
    """Soften a binary in-focus mask with a normalized Gaussian.

    Uses the direct convolution path so the mask stays exactly 0 and 1
    outside the feather band; spectral rounding dust there would otherwise
    leak full-size L1 subgradients into the optimizer.
    """
    data = _mask_data(binary)
    sigma = 0.3 * (radius - 1.0) + 0.8
    kernel = gaussian_kernel(2 * radius + 1, sigma)
    blurred = convolve(PlanarImage(data[:, :, None]), kernel, mode="reference").plane(0)
    return FusionMask(np.clip(blurred, 0.0, 1.0))


def _loss_value(mask_data, img, bokeh_up, target, lap_target, zeta):
    rendered = mask_data[:, :, None] * img.data + (1.0 - mask_data[:, :, None]) * bokeh_up.data
    lap_diff = laplacian(PlanarImage(rendered)).data - lap_target
    height, width = mask_data.shape
    poisson = np.square(lap_diff).sum(axis=(0, 1)).mean() / (2.0 * height * width)
    l1 = np.abs(rendered - target.data).mean()
    return float(zeta * poisson + l1), rendered, lap_diff


def _loss_gradient(mask_data, img, bokeh_up, rendered, lap_diff, target, zeta):
    count = rendered.size
    adjoint = laplacian_adjoint(PlanarImage(lap_diff)).data
    residual = zeta * adjoint + np.sign(rendered - target.data)
    lever = img.data - bokeh_up.data
    return (residual * lever).sum(axis=2) / count


def optimize_mask(img, bokeh_up, defocus_full, cfg=None):
    """Refine a feathered in-focus mask by descending the fusion objective.

    The objective is zeta times the Poisson loss against the binary-mask
    target plus the mean absolute difference from it. Steps use the gradient
    scaled to a maximum per-pixel move of lr, halved until the loss does not
    increase, so the recorded loss trace is non-increasing.
    """
    cfg = cfg or FusionConfig()
    _check_pair(img, bokeh_up)
    binary = binary_mask(defocus_full, cfg.theta)
    target = build_target(img, bokeh_up, binary)
    lap_target = laplacian(target).data
    mask_data = feathered_mask(binary, cfg.feather_radius).data
    loss, rendered, lap_diff = _loss_value(
        mask_data, img, bokeh_up, target, lap_target, cfg.zeta
    )
    trace = [loss]
    for _ in range(cfg.steps):
        grad = _loss_gradient(mask_data, img, bokeh_up, rendered, lap_diff, target, cfg.zeta)
        peak = float(np.abs(grad).max())
        if peak < _GRAD_FLOOR:
            break
        scaled = grad / peak
        step = cfg.lr
        accepted = False
        for _ in range(_BACKTRACK_LIMIT):
            candidate = np.clip(mask_data - step * scaled, 0.0, 1.0)
            cand_loss, cand_rendered, cand_lap = _loss_value(
                candidate, img, bokeh_up, target, lap_target, cfg.zeta
            )
            if cand_loss <= loss:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        mask_data, loss, rendered, lap_diff = candidate, cand_loss, cand_rendered, cand_lap
        trace.append(loss)
    return FusionMask(mask_data, loss_trace=tuple(trace))


def _pyramid(img, levels):
    pyramid = [img]
    while len(pyramid) < levels:
        cur = pyramid[-1]
        if cur.width == 1 and cur.height == 1:
            break
        pyramid.append(resize_bilinear(cur, max(1, cur.width // 2), max(1, cur.height // 2)))
    return pyramid


def blend_laplacian_pyramid(img, bokeh_up, mask, levels=4):
    """Blend sharp and bokeh images per Laplacian-pyramid band with a mask pyramid."""
    _check_pair(img, bokeh_up)
    mask_img = PlanarImage(_mask_data(mask)[:, :, None])
    sharp = _pyramid(img, levels)
    blurry = _pyramid(bokeh_up, levels)
    weights = _pyramid(mask_img, levels)
    top = len(sharp) - 1
    w_top = weights[top].data
    merged = PlanarImage(w_top * sharp[top].data + (1.0 - w_top) * blurry[top].data)
    for level in range(top - 1, -1, -1):
        width, height = sharp[level].width, sharp[level].height
        up_sharp = resize_bilinear(sharp[level + 1], width, height)
        up_blurry = resize_bilinear(blurry[level + 1], width, height)
        band_sharp = sharp[level].data - up_sharp.data
        band_blurry = blurry[level].data - up_blurry.data
        w = weights[level].data
        band = w * band_sharp + (1.0 - w) * band_blurry
        merged = PlanarImage(band + resize_bilinear(merged, width, height).data)
    return merged


def fuse_defocus(img, bokeh_up, defocus_full, cfg=None):
    """Dispatch a fusion method; returns the fused image and the mask used."""
    cfg = cfg or FusionConfig()
    binary = binary_mask(defocus_full, cfg.theta)
    if cfg.method == "binary":
        mask = FusionMask(binary)
        return build_target(img, bokeh_up, binary), mask
    if cfg.method == "feathered":
        mask = feathered_mask(binary, cfg.feather_radius)
        return fuse(img, bokeh_up, mask), mask
    if cfg.method == "laplacian_pyramid":
        mask = FusionMask(binary)
        return blend_laplacian_pyramid(img, bokeh_up, mask, cfg.levels), mask
    mask = optimize_mask(img, bokeh_up, defocus_full, cfg)
    return fuse(img, bokeh_up, mask), mask
