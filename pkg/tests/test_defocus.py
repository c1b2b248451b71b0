"""Defocus maps: signed offsets, normalization, thresholds, and layer membership."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bokehsim.defocus import (
    DefocusMap,
    binary_mask,
    defocus_magnitude,
    defocus_smoothness,
    layer_masks,
    signed_defocus,
)
from bokehsim.imagecore import PlanarImage


def _sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


class TestSignedDefocus:
    def test_offsets_from_focal(self):
        disparity = np.array([[0.0, 0.4, 1.0]])
        signed = signed_defocus(disparity, 0.4)
        np.testing.assert_allclose(signed.data, [[-0.4, 0.0, 0.6]], atol=1e-15)
        assert signed.focal == 0.4

    def test_accepts_planar_image(self):
        disparity = PlanarImage(np.full((3, 3, 1), 0.25))
        signed = signed_defocus(disparity, 0.5)
        np.testing.assert_allclose(signed.data, -0.25)

    def test_rejects_focal_out_of_range(self):
        with pytest.raises(ValueError, match="focal"):
            signed_defocus(np.zeros((2, 2)), 1.5)

    def test_rejects_disparity_out_of_range(self):
        with pytest.raises(ValueError, match="disparity"):
            signed_defocus(np.full((2, 2), 1.25), 0.5)


class TestDefocusMagnitude:
    def test_fixed_range_divides_by_reachable_span(self):
        """The span is the larger of focal and 1 - focal, so values cap at 1."""
        signed = signed_defocus(np.array([[0.1, 1.0]]), 0.1)
        out = defocus_magnitude(signed, "fixed_range")
        np.testing.assert_allclose(out.data, [[0.0, 1.0]], atol=1e-15)

    def test_fixed_range_span_value(self):
        signed = signed_defocus(np.array([[0.55]]), 0.1)
        out = defocus_magnitude(signed)
        assert out.data[0, 0] == pytest.approx(0.45 / 0.9, abs=1e-15)

    def test_max_abs_peaks_at_one(self):
        signed = signed_defocus(np.array([[0.2, 0.5, 0.9]]), 0.5)
        out = defocus_magnitude(signed, "max_abs")
        np.testing.assert_allclose(out.data, [[0.75, 0.0, 1.0]], atol=1e-15)

    def test_max_abs_of_flat_map_is_zero(self):
        signed = signed_defocus(np.full((3, 4), 0.3), 0.3)
        out = defocus_magnitude(signed, "max_abs")
        np.testing.assert_array_equal(out.data, 0.0)

    def test_rejects_unknown_mode(self):
        signed = signed_defocus(np.zeros((2, 2)), 0.0)
        with pytest.raises(ValueError, match="normalize"):
            defocus_magnitude(signed, "unit")

    @settings(deadline=None, max_examples=30)
    @given(focal=st.floats(0.0, 1.0), seed=st.integers(0, 2**32 - 1))
    def test_fixed_range_always_lands_in_unit_interval(self, focal, seed):
        gen = np.random.default_rng(seed)
        disparity = gen.uniform(0.0, 1.0, size=(5, 7))
        out = defocus_magnitude(signed_defocus(disparity, focal))
        assert out.data.min() >= 0.0
        assert out.data.max() <= 1.0


class TestDefocusMap:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="lie in"):
            DefocusMap(np.full((2, 2), 1.5))

    def test_rejects_extra_axes(self):
        with pytest.raises(ValueError, match="single plane"):
            DefocusMap(np.zeros((2, 2, 1)))

    def test_shape_properties(self):
        dmap = DefocusMap(np.zeros((3, 5)))
        assert (dmap.height, dmap.width) == (3, 5)


class TestBinaryMask:
    def test_strictly_below_threshold(self):
        dmap = DefocusMap(np.array([[0.0, 0.249, 0.25, 0.3]]))
        np.testing.assert_array_equal(binary_mask(dmap, 0.25), [[1.0, 1.0, 0.0, 0.0]])

    def test_rejects_degenerate_threshold(self):
        dmap = DefocusMap(np.zeros((2, 2)))
        for theta in (0.0, 1.0):
            with pytest.raises(ValueError, match="theta"):
                binary_mask(dmap, theta)


class TestLayerMasks:
    def test_center_and_neighbor_values(self):
        """At a layer center the mask is sigmoid(2 gamma / layers); one center
        away it is exactly 0.5; two away it is the mirrored tail."""
        dmap = DefocusMap(np.full((1, 1), 4.0 / 15.0))
        masks = layer_masks(dmap, layers=15, gamma=100.0)
        assert masks.shape == (15, 1, 1)
        peak = _sigmoid(2.0 * 100.0 / 15.0)
        tail = _sigmoid(-2.0 * 100.0 / 15.0)
        assert masks[3, 0, 0] == pytest.approx(peak, abs=1e-15)
        assert masks[4, 0, 0] == pytest.approx(0.5, abs=1e-12)
        assert masks[2, 0, 0] == pytest.approx(0.5, abs=1e-12)
        assert masks[5, 0, 0] == pytest.approx(tail, rel=1e-10)
        assert masks[1, 0, 0] == pytest.approx(tail, rel=1e-10)

    def test_matches_scalar_formula_on_random_map(self, rng):
        dmap = DefocusMap(rng.uniform(0.0, 1.0, size=(4, 6)))
        masks = layer_masks(dmap, layers=5, gamma=30.0)
        for layer in range(5):
            center = (layer + 1) / 5.0
            for y in range(4):
                for x in range(6):
                    z = 2.0 * 30.0 * (1.0 / 5.0 - abs(dmap.data[y, x] - center))
                    assert masks[layer, y, x] == pytest.approx(_sigmoid(z), abs=1e-12)

    def test_values_strictly_inside_unit_interval(self, rng):
        dmap = DefocusMap(rng.uniform(0.0, 1.0, size=(8, 8)))
        masks = layer_masks(dmap)
        assert masks.min() > 0.0
        assert masks.max() < 1.0

    def test_every_pixel_has_a_dominant_layer(self, rng):
        """The nearest center is at most one spacing away, so some mask is >= 0.5."""
        dmap = DefocusMap(rng.uniform(0.0, 1.0, size=(16, 16)))
        masks = layer_masks(dmap)
        assert masks.max(axis=0).min() >= 0.5 - 1e-12

    def test_extreme_gamma_is_finite(self):
        dmap = DefocusMap(np.linspace(0.0, 1.0, 32).reshape(4, 8))
        masks = layer_masks(dmap, gamma=1e6)
        assert np.all(np.isfinite(masks))

    def test_validation(self):
        dmap = DefocusMap(np.zeros((2, 2)))
        with pytest.raises(ValueError, match="layer count"):
            layer_masks(dmap, layers=0)
        with pytest.raises(ValueError, match="gamma"):
            layer_masks(dmap, gamma=0.0)


class TestDefocusSmoothness:
    def test_flat_map_scores_zero(self, rand_img):
        dmap = DefocusMap(np.full((16, 16), 0.5))
        assert defocus_smoothness(dmap, rand_img(16, 16)) == 0.0

    def test_ramp_scores_positive(self):
        img = PlanarImage.full(16, 16, 0.5)
        dmap = DefocusMap(np.tile(np.linspace(0.0, 1.0, 16), (16, 1)))
        assert defocus_smoothness(dmap, img) > 0.0

    def test_image_edges_discount_defocus_edges(self, rng):
        """A defocus step aligned with a strong image edge costs less."""
        step = np.zeros((16, 16))
        step[:, 8:] = 1.0
        dmap = DefocusMap(step)
        flat = PlanarImage.full(16, 16, 0.5)
        edged = PlanarImage(np.tile(step[:, :, None] * 0.9, (1, 1, 3)))
        assert defocus_smoothness(dmap, edged) < defocus_smoothness(dmap, flat)

    def test_rejects_bad_scale_count(self, rand_img):
        dmap = DefocusMap(np.zeros((8, 8)))
        with pytest.raises(ValueError, match="scale"):
            defocus_smoothness(dmap, rand_img(8, 8), scales=0)
