"""Radiance weighting that amplifies highlights before layered rendering."""

from dataclasses import dataclass

import numpy as np

from bokehsim.imagecore import PlanarImage

BASE_MAPS = ("identity",)


@dataclass(frozen=True)
class RadianceParams:
    """Highlight amplification settings."""

    alpha: float = 3.0
    beta: float = 5.0
    threshold: float = 0.99
    base_map: str = "identity"

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0.0 < self.threshold:
            raise ValueError("threshold must be positive")
        if self.base_map not in BASE_MAPS:
            raise ValueError("unknown base map %r" % (self.base_map,))


def bright_mask(img, threshold=0.99):
    """Per-channel indicator of values at or above the highlight threshold."""
    return (img.data >= threshold).astype(np.float64)


def virtualize(img, params=None):
    """Per-pixel rendering weights: amplified for highlights, base value elsewhere.

    Highlight channels receive alpha * value ** beta; the remaining channels
    keep their image value as weight.
    """
    params = params or RadianceParams()
    mask = bright_mask(img, params.threshold)
    amplified = params.alpha * np.power(img.data, params.beta)
    weights = mask * amplified + (1.0 - mask) * img.data
    return PlanarImage(weights)
