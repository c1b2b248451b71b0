"""Shared fixtures for the bokehsim test suite."""

import numpy as np
import pytest

from bokehsim.imagecore import PlanarImage


@pytest.fixture
def rng():
    """Deterministic generator, fresh per test."""
    return np.random.default_rng(1234)


@pytest.fixture
def rand_img(rng):
    """Factory for uniform random images in [0, 1]."""

    def make(width, height, channels=3, seed=None):
        gen = np.random.default_rng(seed) if seed is not None else rng
        return PlanarImage(gen.uniform(0.0, 1.0, size=(height, width, channels)))

    return make
