"""Disk blur kernels and per-layer size schedules."""

from dataclasses import dataclass

import numpy as np

from bokehsim.imagecore import Kernel2D

SOFT_SIGMA = 0.25
SOFT_PHI = 0.5
KERNEL_SHAPES = ("soft", "hard")


@dataclass(frozen=True)
class KernelSchedule:
    """Per-layer odd kernel sizes.

    Named schedules grow strictly with the layer index; custom size lists
    (rescaled banks) may repeat sizes but must never shrink.
    """

    sizes: tuple
    sampling: str

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("schedule must contain at least one size")
        for size in self.sizes:
            if size < 1 or size % 2 == 0:
                raise ValueError("kernel sizes must be odd and positive")
        if self.sampling == "custom":
            if any(b < a for a, b in zip(self.sizes, self.sizes[1:])):
                raise ValueError("kernel sizes must be non-decreasing")
        elif any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("kernel sizes must be strictly increasing")

    def __len__(self):
        return len(self.sizes)


@dataclass(frozen=True, eq=False)
class KernelBank:
    """Normalized blur kernels indexed by depth layer."""

    schedule: KernelSchedule
    kernels: tuple
    shape: str
    sigma: float
    phi: float

    def __len__(self):
        return len(self.kernels)

    def __getitem__(self, index):
        return self.kernels[index]

    @property
    def sizes(self):
        return self.schedule.sizes

    @property
    def max_radius(self):
        return (max(self.sizes) - 1) // 2


def _radius_grid(radius):
    reach = int(np.ceil(radius))
    offsets = np.arange(-reach, reach + 1, dtype=np.float64)
    yy, xx = np.meshgrid(offsets, offsets, indexing="ij")
    return yy, xx


def _finish(taps, normalize):
    if normalize:
        taps = taps / taps.sum()
    return Kernel2D(taps)


def hard_disk(radius, normalize=True):
    """Binary disk kernel: a tap is set when it lies inside the disk radius."""
    if radius < 1:
        raise ValueError("disk radius must be at least 1")
    yy, xx = _radius_grid(radius)
    taps = (radius * radius - xx * xx - yy * yy >= 0).astype(np.float64)
    return _finish(taps, normalize)


def soft_disk(radius, sigma=SOFT_SIGMA, phi=SOFT_PHI, normalize=True):
    """Disk kernel with a tanh falloff at the rim."""
    if radius < 1:
        raise ValueError("disk radius must be at least 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    yy, xx = _radius_grid(radius)
    taps = 0.5 + 0.5 * np.tanh(sigma * (radius * radius - xx * xx - yy * yy) + phi)
    return _finish(taps, normalize)


def gaussian_kernel(size, sigma):
    """Normalized isotropic Gaussian kernel."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if size < 1 or size % 2 == 0:
        raise ValueError("kernel size must be odd and positive")
    offsets = np.arange(size, dtype=np.float64) - (size - 1) // 2
    yy, xx = np.meshgrid(offsets, offsets, indexing="ij")
    taps = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return _finish(taps, True)


def _piecewise_size(layer):
    if layer < 3:
        return 2 * layer + 1
    if layer < 8:
        return 4 * (layer - 3) + 7
    if layer < 11:
        return 6 * (layer - 8) + 27
    return 8 * (layer - 11) + 45


def growing_schedule():
    """Identity layer followed by piecewise-linear growing sizes up to 69."""
    sizes = (1,) + tuple(_piecewise_size(layer) for layer in range(1, 15))
    return KernelSchedule(sizes=sizes, sampling="growing")


def uniform_schedule(layers=15, step=4):
    """Evenly spaced sizes starting at 3, without an identity layer."""
    if layers < 2:
        raise ValueError("layer count must be at least 2")
    if step < 2 or step % 2 != 0:
        raise ValueError("step must be a positive even integer")
    sizes = tuple(3 + step * index for index in range(layers))
    return KernelSchedule(sizes=sizes, sampling="uniform")


def scale_sizes(sizes, blur_scale):
    """Rescale kernel sizes, rounding to the nearest odd size of at least 1."""
    if blur_scale <= 0:
        raise ValueError("blur scale must be positive")
    scaled = []
    for size in sizes:
        if size == 1:
            scaled.append(1)
            continue
        value = size * blur_scale
        odd = 2 * int(np.floor((value - 1.0) / 2.0 + 0.5)) + 1
        scaled.append(max(1, odd))
    return tuple(scaled)


def build_bank(schedule, shape="soft", sigma=SOFT_SIGMA, phi=SOFT_PHI):
    """Build normalized kernels for every size in a schedule or size sequence."""
    if shape not in KERNEL_SHAPES:
        raise ValueError("unknown kernel shape %r" % (shape,))
    if not isinstance(schedule, KernelSchedule):
        schedule = KernelSchedule(sizes=tuple(schedule), sampling="custom")
    kernels = []
    for size in schedule.sizes:
        if size == 1:
            kernels.append(Kernel2D(np.ones((1, 1))))
        elif shape == "hard":
            kernels.append(hard_disk((size - 1) / 2.0))
        else:
            kernels.append(soft_disk((size - 1) / 2.0, sigma, phi))
    return KernelBank(
        schedule=schedule, kernels=tuple(kernels), shape=shape, sigma=sigma, phi=phi
    )
