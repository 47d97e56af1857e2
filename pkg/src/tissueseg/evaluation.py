"""Synthetic ground-truth phantoms and segmentation metrics."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .raster import GrayImage, LabelMap

DEFAULT_MEANS = (20, 80, 140, 200)
DEFAULT_NOISE = 12.0
DEFAULT_SIZE = 256

# normalized radii of the nested ellipses, outermost first
ELLIPSE_RADII = (0.90, 0.75, 0.55, 0.35)


@dataclass(frozen=True)
class PhantomParams:
    width: int
    height: int
    means: tuple[float, ...]
    noise_sigma: float
    seed: int


@dataclass(frozen=True, eq=False)
class Phantom:
    image: GrayImage
    truth: LabelMap
    params: PhantomParams


def ellipse_radii(num_classes: int) -> tuple[float, ...]:
    """Radii for the ``num_classes - 1`` nested regions inside the background.

    Up to five classes use the fixed layout; larger counts space the
    ellipses evenly between 0.9 and 0.15.
    """
    if num_classes - 1 <= len(ELLIPSE_RADII):
        return ELLIPSE_RADII[: num_classes - 1]
    return tuple(float(r) for r in np.linspace(0.90, 0.15, num_classes - 1))


def phantom_truth(width: int, height: int, num_classes: int) -> LabelMap:
    """Concentric-ellipse label layout, class 0 outermost."""
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    y, x = np.mgrid[0:height, 0:width]
    rho = np.hypot((x - cx) / (width / 2.0), (y - cy) / (height / 2.0))
    labels = np.zeros((height, width), dtype=np.int64)
    for r in ellipse_radii(num_classes):
        labels += rho < r
    return LabelMap(labels, num_classes)


def make_phantom(
    width: int = DEFAULT_SIZE,
    height: int = DEFAULT_SIZE,
    means=DEFAULT_MEANS,
    noise_sigma: float = DEFAULT_NOISE,
    seed: int = 0,
) -> Phantom:
    """Brain-like phantom: class means plus seeded Gaussian noise.

    Noise comes from numpy's PCG64 generator (``default_rng(seed)``) and is
    drawn for the whole raster in row-major order. Intensities are rounded
    half-to-even and clipped to ``[0, 255]``.
    """
    means = tuple(float(m) for m in means)
    if len(means) < 2:
        raise ValueError("need at least two class means")
    if any(b <= a for a, b in zip(means[:-1], means[1:])):
        raise ValueError(f"class means must be strictly ascending, got {means}")
    if width < 32 or height < 32:
        raise ValueError("phantom must be at least 32x32")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    truth = phantom_truth(width, height, len(means))
    present = np.bincount(truth.labels.ravel(), minlength=truth.num_classes)
    if np.any(present == 0):
        raise ValueError("phantom too small to contain every class region")
    base = np.asarray(means)[truth.labels]
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((height, width)) * noise_sigma
    pixels = np.clip(np.rint(base + noise), 0, 255).astype(np.uint8)
    params = PhantomParams(width, height, means, float(noise_sigma), int(seed))
    return Phantom(GrayImage(pixels), truth, params)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[a, b]``: pixels with true class ``a`` predicted as ``b``."""

    counts: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(truth: LabelMap, predicted: LabelMap) -> ConfusionMatrix:
    if truth.shape != predicted.shape:
        raise ValueError(f"shape mismatch: {truth.shape} vs {predicted.shape}")
    if truth.num_classes != predicted.num_classes:
        raise ValueError(
            f"class count mismatch: {truth.num_classes} vs {predicted.num_classes}"
        )
    c = truth.num_classes
    flat = truth.labels.ravel() * c + predicted.labels.ravel()
    counts = np.bincount(flat, minlength=c * c).reshape(c, c)
    counts.flags.writeable = False
    return ConfusionMatrix(counts)


def dice(conf: ConfusionMatrix, c: int) -> float:
    """Dice overlap of class ``c``; 1.0 when neither map contains it."""
    if not 0 <= c < conf.num_classes:
        raise ValueError(f"class {c} out of range")
    tp = conf.counts[c, c]
    fp = conf.counts[:, c].sum() - tp
    fn = conf.counts[c, :].sum() - tp
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else float(2 * tp / denom)


def class_fractions(labels: LabelMap) -> np.ndarray:
    counts = np.bincount(labels.labels.ravel(), minlength=labels.num_classes)
    return counts / counts.sum()


def dice_scores(truth: LabelMap, predicted: LabelMap) -> np.ndarray:
    conf = confusion(truth, predicted)
    return np.array([dice(conf, c) for c in range(conf.num_classes)])


def metrics_csv(truth: LabelMap, predicted: LabelMap) -> str:
    """One row per class: ``class,dice,truth_fraction,predicted_fraction``."""
    scores = dice_scores(truth, predicted)
    tf = class_fractions(truth)
    pf = class_fractions(predicted)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "dice", "truth_fraction", "predicted_fraction"])
    for c in range(truth.num_classes):
        writer.writerow([c, f"{scores[c]:.6f}", f"{tf[c]:.6f}", f"{pf[c]:.6f}"])
    return buf.getvalue()
