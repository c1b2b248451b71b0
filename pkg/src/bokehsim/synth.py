"""Deterministic synthetic scenes with analytic ground-truth composites."""

from dataclasses import dataclass

import numpy as np

from bokehsim.imagecore import PlanarImage, convolve
from bokehsim.kernels import build_bank, growing_schedule


@dataclass(frozen=True)
class FlatRecipe:
    """Textured image on a single plane of constant disparity."""

    disparity: float = 0.0
    base: float = 0.45
    detail: float = 0.25


@dataclass(frozen=True)
class RampRecipe:
    """Textured image over a linear left-to-right or top-to-bottom disparity ramp."""

    start: float = 0.0
    stop: float = 1.0
    axis: str = "x"
    base: float = 0.45
    detail: float = 0.25


@dataclass(frozen=True)
class TwoPlaneRecipe:
    """Foreground shape on a background plane, separated by a calm moat band.

    The moat carries only low-amplitude detail so the analytic composite stays
    valid: blur from the background plane never reaches foreground content.
    Disparity ramps between the planes over `transition` pixels starting
    `margin` pixels outside the foreground content.
    """

    fg_disparity: float = 0.1
    bg_disparity: float = 0.34
    shape: str = "disk"
    radius_frac: float = 0.22
    margin: float = 16.0
    transition: float = 12.0
    moat: float = 24.0
    base: float = 0.45
    detail: float = 0.22
    moat_detail: float = 0.01
    moat_wavelength: float = 64.0


@dataclass(frozen=True)
class HighlightsRecipe:
    """Dim far plane scattered with saturated dots that bloom into bokeh balls."""

    disparity: float = 0.75
    dots: int = 6
    dot_radius: float = 5.0
    intensity: float = 1.0
    base: float = 0.05
    detail: float = 0.01
    separation: float = 48.0


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """Image and disparity pair with the geometry needed for exact references."""

    image: PlanarImage
    disparity: PlanarImage
    recipe: object
    region_mask: object = None
    dot_centers: tuple = ()


def _texture(rng, width, height, base, amplitude, waves=4):
    """Bounded sinusoid mixture: values stay within base +- amplitude."""
    xs = np.arange(width, dtype=np.float64) / max(width, 1)
    ys = np.arange(height, dtype=np.float64) / max(height, 1)
    grid_x, grid_y = np.meshgrid(xs, ys)
    out = np.empty((height, width, 3), dtype=np.float64)
    for channel in range(3):
        acc = np.zeros((height, width), dtype=np.float64)
        for _ in range(waves):
            fx, fy = rng.uniform(2.0, 9.0, size=2)
            px, py = rng.uniform(0.0, 2.0 * np.pi, size=2)
            acc += np.sin(2.0 * np.pi * fx * grid_x + px) * np.sin(
                2.0 * np.pi * fy * grid_y + py
            )
        out[:, :, channel] = base + amplitude * acc / waves
    return np.clip(out, 0.0, 1.0)


def _radial_field(recipe, width, height):
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    xx, yy = np.meshgrid(np.arange(width) - cx, np.arange(height) - cy)
    if recipe.shape == "square":
        return np.maximum(np.abs(xx), np.abs(yy))
    if recipe.shape == "disk":
        return np.hypot(xx, yy)
    raise ValueError("unknown foreground shape %r" % (recipe.shape,))


def _check_unit(value, name):
    if not 0.0 <= value <= 1.0:
        raise ValueError("%s must lie in [0, 1]" % name)


def _make_flat(recipe, width, height, rng):
    image = _texture(rng, width, height, recipe.base, recipe.detail)
    _check_unit(recipe.disparity, "disparity")
    disparity = np.full((height, width, 1), recipe.disparity, dtype=np.float64)
    return SyntheticScene(
        image=PlanarImage(image), disparity=PlanarImage(disparity), recipe=recipe
    )


def _make_ramp(recipe, width, height, rng):
    _check_unit(recipe.start, "start")
    _check_unit(recipe.stop, "stop")
    image = _texture(rng, width, height, recipe.base, recipe.detail)
    if recipe.axis == "x":
        line = np.linspace(recipe.start, recipe.stop, width)
        disparity = np.tile(line, (height, 1))
    elif recipe.axis == "y":
        line = np.linspace(recipe.start, recipe.stop, height)
        disparity = np.tile(line[:, None], (1, width))
    else:
        raise ValueError("ramp axis must be x or y")
    return SyntheticScene(
        image=PlanarImage(image),
        disparity=PlanarImage(disparity[:, :, None]),
        recipe=recipe,
    )


def _make_two_plane(recipe, width, height, rng):
    _check_unit(recipe.fg_disparity, "fg_disparity")
    _check_unit(recipe.bg_disparity, "bg_disparity")
    if recipe.transition < 0 or recipe.margin < 0 or recipe.moat <= 0:
        raise ValueError("geometry margins must be non-negative and moat positive")
    radial = _radial_field(recipe, width, height)
    content_radius = recipe.radius_frac * min(width, height)
    ramp_start = content_radius + recipe.margin
    split_radius = ramp_start + recipe.transition / 2.0
    bg_radius = split_radius + recipe.moat

    fg_tex = _texture(rng, width, height, recipe.base, recipe.detail)
    bg_tex = _texture(rng, width, height, recipe.base, recipe.detail)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    ripple = np.sin(2.0 * np.pi * radial / recipe.moat_wavelength + phase)
    moat = recipe.base + recipe.moat_detail * ripple[:, :, None]

    image = np.where(radial[:, :, None] < content_radius, fg_tex, moat)
    image = np.where(radial[:, :, None] >= bg_radius, bg_tex, image)

    if recipe.transition > 0:
        blend = np.clip((radial - ramp_start) / recipe.transition, 0.0, 1.0)
    else:
        blend = (radial >= ramp_start).astype(np.float64)
    disparity = recipe.fg_disparity + (recipe.bg_disparity - recipe.fg_disparity) * blend

    return SyntheticScene(
        image=PlanarImage(np.clip(image, 0.0, 1.0)),
        disparity=PlanarImage(disparity[:, :, None]),
        recipe=recipe,
        region_mask=radial <= split_radius,
    )


def _make_highlights(recipe, width, height, rng):
    _check_unit(recipe.disparity, "disparity")
    if recipe.intensity < 0.99:
        raise ValueError("highlight intensity must be at least 0.99")
    image = _texture(rng, width, height, recipe.base, recipe.detail)
    margin = 40
    separation = recipe.separation
    centers = []
    attempts = 0
    while len(centers) < recipe.dots and attempts < 5000:
        attempts += 1
        x = rng.integers(margin, max(width - margin, margin + 1))
        y = rng.integers(margin, max(height - margin, margin + 1))
        if all(np.hypot(x - cx, y - cy) >= separation for cx, cy in centers):
            centers.append((int(x), int(y)))
    xx, yy = np.meshgrid(np.arange(width), np.arange(height))
    for cx, cy in centers:
        inside = np.hypot(xx - cx, yy - cy) <= recipe.dot_radius
        image[inside] = recipe.intensity
    disparity = np.full((height, width, 1), recipe.disparity, dtype=np.float64)
    return SyntheticScene(
        image=PlanarImage(image),
        disparity=PlanarImage(disparity),
        recipe=recipe,
        dot_centers=tuple(centers),
    )


def make_scene(recipe, width=256, height=256, seed=0):
    """Build a deterministic scene for the given recipe, size, and seed."""
    if width < 16 or height < 16:
        raise ValueError("scene size must be at least 16 x 16")
    rng = np.random.default_rng(seed)
    if isinstance(recipe, FlatRecipe):
        return _make_flat(recipe, width, height, rng)
    if isinstance(recipe, RampRecipe):
        return _make_ramp(recipe, width, height, rng)
    if isinstance(recipe, TwoPlaneRecipe):
        return _make_two_plane(recipe, width, height, rng)
    if isinstance(recipe, HighlightsRecipe):
        return _make_highlights(recipe, width, height, rng)
    raise ValueError("unknown recipe %r" % (recipe,))


def _plane_layer(disparity, focal, layers):
    magnitude = abs(disparity - focal) / max(focal, 1.0 - focal)
    centers = np.arange(1, layers + 1) / layers
    return int(np.argmin(np.abs(magnitude - centers))) + 1


def ground_truth_composite(scene, focal, bank=None, layers=15):
    """Exact reference for a two-plane scene: each plane blurred with its own kernel.

    Valid only when the moat is wide enough that background blur cannot reach
    foreground content; otherwise the planes interact and no per-region
    composite is exact.
    """
    if not isinstance(scene.recipe, TwoPlaneRecipe):
        raise ValueError("ground truth composites require a two-plane scene")
    if not 0.0 <= focal <= 1.0:
        raise ValueError("focal must lie in [0, 1]")
    bank = bank or build_bank(growing_schedule())
    fg_layer = _plane_layer(scene.recipe.fg_disparity, focal, layers)
    bg_layer = _plane_layer(scene.recipe.bg_disparity, focal, layers)
    max_radius = max(bank[fg_layer - 1].radius, bank[bg_layer - 1].radius)
    if scene.recipe.moat < max_radius + 2:
        raise ValueError(
            "planes are not separable: moat %.1f px is narrower than the %d px blur"
            % (scene.recipe.moat, max_radius + 2)
        )

    def rendered(layer):
        kernel = bank[layer - 1]
        if kernel.size == 1:
            return scene.image.data
        return convolve(scene.image, kernel).data

    region = scene.region_mask[:, :, None]
    return PlanarImage(np.where(region, rendered(fg_layer), rendered(bg_layer)))
