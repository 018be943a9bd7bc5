"""Image-quality scores: SSIM, MSE, PSNR, and dataset averaging.

SSIM uses the original publication's defaults: 11x11 Gaussian window with
sigma 1.5, K1=0.01, K2=0.03, dynamic range 255, moments taken only at
fully-interior window positions, per-channel scores averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyList, TooSmall
from .images import check_image


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Sampled 1-D Gaussian, normalized to sum 1."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> float:
    check_image(a)
    check_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if a.shape[0] < params.window or a.shape[1] < params.window:
        raise TooSmall(f"images must be at least {params.window}x{params.window}")
    win = gaussian_window(params.window, params.sigma)
    c1 = (params.k1 * params.data_range) ** 2
    c2 = (params.k2 * params.data_range) ** 2
    scores = []
    for c in range(3):
        x = a[:, :, c].astype(np.float64)
        y = b[:, :, c].astype(np.float64)
        mu_x = kernels.gauss_valid(x, win)
        mu_y = kernels.gauss_valid(y, win)
        xx = kernels.gauss_valid(x * x, win)
        yy = kernels.gauss_valid(y * y, win)
        xy = kernels.gauss_valid(x * y, win)
        var_x = xx - mu_x * mu_x
        var_y = yy - mu_y * mu_y
        cov = xy - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        scores.append(float(np.mean(num / den)))
    return sum(scores) / 3.0


def mse(a: np.ndarray, b: np.ndarray) -> float:
    check_image(a)
    check_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    d = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(d * d))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    e = mse(a, b)
    if e == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / e)


def average_over(pairs, metric) -> float:
    """Arithmetic mean of metric(a, b) over pairs.

    Uses exact compensated summation, so the result is independent of the
    pair order.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyList("cannot average over an empty list")
    return math.fsum(metric(a, b) for a, b in pairs) / len(pairs)
