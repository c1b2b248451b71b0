"""Disk kernels, size schedules, and bank construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bokehsim.kernels import (
    KernelBank,
    KernelSchedule,
    build_bank,
    gaussian_kernel,
    growing_schedule,
    hard_disk,
    scale_sizes,
    soft_disk,
    uniform_schedule,
)


class TestSchedules:
    def test_growing_sizes(self):
        """Identity head, then 2 steps of +2, 5 of +4, 3 of +6, 4 of +8."""
        schedule = growing_schedule()
        assert schedule.sizes == (1, 3, 5, 7, 11, 15, 19, 23, 27, 33, 39, 45, 53, 61, 69)
        assert schedule.sampling == "growing"
        assert len(schedule) == 15

    def test_uniform_sizes(self):
        assert uniform_schedule(4, 4).sizes == (3, 7, 11, 15)
        assert uniform_schedule(3, 2).sizes == (3, 5, 7)
        assert uniform_schedule().sampling == "uniform"

    def test_uniform_validation(self):
        with pytest.raises(ValueError, match="at least 2"):
            uniform_schedule(1, 4)
        with pytest.raises(ValueError, match="even"):
            uniform_schedule(4, 3)

    def test_schedule_validation(self):
        with pytest.raises(ValueError, match="at least one"):
            KernelSchedule(sizes=(), sampling="custom")
        with pytest.raises(ValueError, match="odd"):
            KernelSchedule(sizes=(1, 4), sampling="custom")
        with pytest.raises(ValueError, match="increasing"):
            KernelSchedule(sizes=(3, 3), sampling="uniform")
        with pytest.raises(ValueError, match="non-decreasing"):
            KernelSchedule(sizes=(3, 1), sampling="custom")

    def test_custom_schedules_allow_repeated_sizes(self):
        """Rescaled banks collapse several layers onto the same size."""
        schedule = KernelSchedule(sizes=(1, 1, 3, 3, 5), sampling="custom")
        assert len(schedule) == 5


class TestHardDisk:
    def test_radius_one_is_plus_shape(self):
        """Five taps survive x*x + y*y <= 1, each worth one fifth."""
        want = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]) / 5.0
        np.testing.assert_array_equal(hard_disk(1).taps, want)

    def test_radius_five_boundary_membership(self):
        """The 3-4-5 triangle lies exactly on the rim; (4, 4) falls outside."""
        taps = hard_disk(5, normalize=False).taps
        center = 5
        assert taps[center + 3, center + 4] == 1.0
        assert taps[center + 4, center + 3] == 1.0
        assert taps[center + 4, center + 4] == 0.0
        assert taps.sum() == 81.0

    def test_rejects_small_radius(self):
        with pytest.raises(ValueError, match="at least 1"):
            hard_disk(0.5)


class TestSoftDisk:
    def test_center_tap_closed_form(self):
        """Unnormalized center tap is 0.5 + 0.5 tanh(sigma r^2 + phi)."""
        taps = soft_disk(3, sigma=0.25, phi=0.5, normalize=False).taps
        want = 0.5 + 0.5 * math.tanh(0.25 * 9.0 + 0.5)
        assert taps[3, 3] == pytest.approx(want, abs=1e-15)

    def test_support_strictly_exceeds_hard_disk(self):
        """The tanh tail keeps every tap positive where the hard disk is zero."""
        soft = soft_disk(3).taps
        hard = hard_disk(3).taps
        assert soft.shape == hard.shape
        assert np.all(soft > 0.0)
        assert np.any(hard == 0.0)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            soft_disk(3, sigma=0.0)

    @settings(deadline=None, max_examples=20)
    @given(radius=st.integers(1, 20))
    def test_normalized_symmetric_monotone(self, radius):
        """Taps sum to one, obey the dihedral symmetries, and decay with radius."""
        kernel = soft_disk(radius)
        taps = kernel.taps
        assert abs(taps.sum() - 1.0) <= 1e-12
        np.testing.assert_array_equal(taps, taps[::-1])
        np.testing.assert_array_equal(taps, taps[:, ::-1])
        np.testing.assert_array_equal(taps, taps.T)
        offsets = np.arange(-kernel.radius, kernel.radius + 1)
        yy, xx = np.meshgrid(offsets, offsets, indexing="ij")
        rad = (yy * yy + xx * xx).ravel()
        order = np.argsort(rad)
        values = taps.ravel()[order]
        assert np.all(np.diff(values) <= 1e-15)


class TestGaussianKernel:
    def test_neighbor_ratio_closed_form(self):
        """Adjacent tap over center tap equals exp(-1 / (2 sigma^2))."""
        sigma = 1.5
        taps = gaussian_kernel(11, sigma).taps
        want = math.exp(-1.0 / (2.0 * sigma * sigma))
        assert taps[5, 6] / taps[5, 5] == pytest.approx(want, rel=1e-12)

    def test_normalized_and_symmetric(self):
        taps = gaussian_kernel(7, 0.8).taps
        assert abs(taps.sum() - 1.0) <= 1e-12
        np.testing.assert_array_equal(taps, taps.T)
        np.testing.assert_array_equal(taps, taps[::-1])

    def test_validation(self):
        with pytest.raises(ValueError, match="sigma"):
            gaussian_kernel(5, 0.0)
        with pytest.raises(ValueError, match="odd"):
            gaussian_kernel(4, 1.0)


class TestScaleSizes:
    def test_scale_one_is_identity(self):
        sizes = growing_schedule().sizes
        assert scale_sizes(sizes, 1.0) == sizes

    def test_doubling(self):
        """Each scaled size is the nearest odd value, ties rounding up."""
        assert scale_sizes((1, 3, 5, 7), 2.0) == (1, 7, 11, 15)

    def test_halving(self):
        assert scale_sizes((1, 3, 7, 69), 0.5) == (1, 1, 3, 35)

    def test_identity_layer_never_scales(self):
        assert scale_sizes((1,), 4.0) == (1,)

    def test_rejects_non_positive_scale(self):
        with pytest.raises(ValueError, match="positive"):
            scale_sizes((3,), 0.0)

    @settings(deadline=None, max_examples=50)
    @given(
        size=st.integers(0, 40).map(lambda n: 2 * n + 1),
        scale=st.floats(0.05, 4.0),
    )
    def test_results_stay_odd_and_positive(self, size, scale):
        (scaled,) = scale_sizes((size,), scale)
        assert scaled >= 1
        assert scaled % 2 == 1


class TestBuildBank:
    def test_growing_bank_layout(self):
        bank = build_bank(growing_schedule())
        assert isinstance(bank, KernelBank)
        assert len(bank) == 15
        assert bank.sizes == growing_schedule().sizes
        assert bank.max_radius == 34
        assert [k.size for k in bank.kernels] == list(bank.sizes)

    def test_identity_layer_kernel(self):
        bank = build_bank((1, 3))
        np.testing.assert_array_equal(bank[0].taps, np.ones((1, 1)))
        assert bank.schedule.sampling == "custom"

    def test_every_kernel_normalized(self):
        for shape in ("soft", "hard"):
            bank = build_bank(growing_schedule(), shape=shape)
            for kernel in bank.kernels:
                assert kernel.normalized

    def test_hard_and_soft_differ(self):
        soft = build_bank((3, 7), shape="soft")
        hard = build_bank((3, 7), shape="hard")
        assert not np.array_equal(soft[1].taps, hard[1].taps)
        assert soft.sizes == hard.sizes

    def test_rejects_unknown_shape(self):
        with pytest.raises(ValueError, match="shape"):
            build_bank((3, 5), shape="triangle")
