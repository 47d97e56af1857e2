"""Discrete Gaussian smoothing of posterior membership fields."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .bayes import EM_MAX_ITERS, bayes_posteriors, map_label
from .raster import GrayImage, LabelMap, MembershipImage

DEFAULT_SIGMA = 1.0
DEFAULT_ITERATIONS = 5

_UNDERFLOW = 1e-300


def gaussian_1d(x, sigma: float):
    """Normal density with zero mean and standard deviation ``sigma``."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-(x * x) / (2.0 * sigma * sigma)) / math.sqrt(2.0 * math.pi * sigma * sigma)


def gaussian_2d(x, y, sigma: float):
    """Isotropic bivariate normal density, equal to ``gaussian_1d(x) * gaussian_1d(y)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


@dataclass(frozen=True, eq=False)
class Kernel1D:
    """Symmetric normalized taps; ``raw`` keeps the unnormalized samples."""

    sigma: float
    radius: int
    taps: np.ndarray
    raw: np.ndarray


def gaussian_kernel(sigma: float, radius: Optional[int] = None) -> Kernel1D:
    """Sampled Gaussian on ``-radius..radius``, normalized to unit sum.

    ``radius`` defaults to ``ceil(3 * sigma)``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = int(math.ceil(3.0 * sigma))
    elif int(radius) != radius or radius < 1:
        raise ValueError(f"radius must be a positive integer, got {radius}")
    radius = int(radius)
    raw = gaussian_1d(np.arange(-radius, radius + 1), sigma)
    taps = raw / raw.sum()
    raw.flags.writeable = False
    taps.flags.writeable = False
    return Kernel1D(float(sigma), radius, taps, raw)


def _correlate_axis(plane: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    r = (taps.size - 1) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    padded = np.pad(plane, pad, mode="edge")
    n = plane.shape[axis]
    out = np.zeros_like(plane)
    # fixed accumulation order keeps results bit-identical between runs
    for i, w in enumerate(taps):
        out += w * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def convolve_separable(plane, kernel: Kernel1D) -> np.ndarray:
    """Convolve along x (columns), then y (rows), replicating edge pixels.

    The kernel is symmetric, so correlation and convolution coincide.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    return _correlate_axis(_correlate_axis(plane, kernel.taps, axis=1), kernel.taps, axis=0)


def _renormalize(values: np.ndarray) -> np.ndarray:
    total = values.sum(axis=2, keepdims=True)
    c = values.shape[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(total >= _UNDERFLOW, values / total, 1.0 / c)


def iter_smoothing(
    memberships: MembershipImage, sigma: float = DEFAULT_SIGMA, iterations: int = DEFAULT_ITERATIONS
) -> Iterator[MembershipImage]:
    """Yield the renormalized membership field after each smoothing pass."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    kernel = gaussian_kernel(sigma)
    values = memberships.values
    for _ in range(iterations):
        smoothed = np.stack(
            [convolve_separable(values[:, :, c], kernel) for c in range(values.shape[2])],
            axis=2,
        )
        values = _renormalize(np.maximum(smoothed, 0.0))
        yield MembershipImage(values, normalized=True)


def smooth_memberships(
    memberships: MembershipImage,
    sigma: float = DEFAULT_SIGMA,
    iterations: int = DEFAULT_ITERATIONS,
    callback: Optional[Callable[[int, MembershipImage], None]] = None,
) -> MembershipImage:
    """Smooth every class plane ``iterations`` times, renormalizing after each pass.

    ``callback(i, field)`` is invoked with each intermediate field
    (``i`` counts from 1). Zero iterations return the input unchanged.
    """
    out = memberships
    for i, out in enumerate(iter_smoothing(memberships, sigma, iterations), start=1):
        if callback is not None:
            callback(i, out)
    return out


def classify_bayes_smoothed(
    image: GrayImage,
    num_classes: int,
    sigma: float = DEFAULT_SIGMA,
    iterations: int = DEFAULT_ITERATIONS,
    priors_mode: str = "uniform",
    em_iters: int = EM_MAX_ITERS,
    callback: Optional[Callable[[int, MembershipImage], None]] = None,
) -> LabelMap:
    """Bayesian classification with Gaussian-smoothed posteriors."""
    post, _ = bayes_posteriors(image, num_classes, priors_mode, em_iters)
    return map_label(smooth_memberships(post, sigma, iterations, callback))
