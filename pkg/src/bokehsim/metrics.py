"""Image quality metrics: PSNR, SSIM, and mean absolute error."""

import math
from dataclasses import dataclass, field

import numpy as np

from bokehsim.imagecore import PlanarImage, convolve
from bokehsim.kernels import gaussian_kernel

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


@dataclass(frozen=True)
class MetricReport:
    """Quality scores, optionally aggregated over named records."""

    psnr: float
    ssim: float
    l1: float
    records: dict = field(default_factory=dict)

    @classmethod
    def aggregate(cls, records):
        """Mean scores over a mapping of name to MetricReport."""
        if not records:
            raise ValueError("cannot aggregate an empty record set")
        reports = list(records.values())
        return cls(
            psnr=float(np.mean([r.psnr for r in reports])),
            ssim=float(np.mean([r.ssim for r in reports])),
            l1=float(np.mean([r.l1 for r in reports])),
            records=dict(records),
        )


def _check_shapes(a, b):
    if a.data.shape != b.data.shape:
        raise ValueError("metric operands must have equal shapes")


def mse(a, b):
    """Mean squared error over every sample."""
    _check_shapes(a, b)
    return float(np.mean(np.square(a.data - b.data)))


def psnr(a, b, peak=1.0):
    """Peak signal-to-noise ratio in dB; infinite for identical images."""
    if peak <= 0:
        raise ValueError("peak must be positive")
    error = mse(a, b)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / error)


def l1(a, b):
    """Mean absolute error over every sample."""
    _check_shapes(a, b)
    return float(np.mean(np.abs(a.data - b.data)))


def ssim(a, b):
    """Structural similarity with an 11x11 Gaussian window of sigma 1.5."""
    _check_shapes(a, b)
    window = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)

    def smooth(data):
        return convolve(PlanarImage(data), window).data

    da, db = a.data, b.data
    mu_a = smooth(da)
    mu_b = smooth(db)
    var_a = smooth(da * da) - mu_a * mu_a
    var_b = smooth(db * db) - mu_b * mu_b
    cov = smooth(da * db) - mu_a * mu_b
    numerator = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    denominator = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(numerator / denominator))


def evaluate(a, b, peak=1.0):
    """All metrics for one image pair."""
    return MetricReport(psnr=psnr(a, b, peak), ssim=ssim(a, b), l1=l1(a, b))
