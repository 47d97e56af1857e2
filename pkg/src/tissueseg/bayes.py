"""Gaussian-mixture Bayesian classification of gray-level images.

The mixture is seeded from a multi-level Otsu partition, refined with EM on
the intensity histogram, and pixels are labeled by maximum posterior.
Components are kept in ascending-mean order, so label 0 is the darkest
class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .otsu import multi_otsu
from .raster import (
    DegenerateInputError,
    GrayImage,
    Histogram,
    LabelMap,
    MembershipImage,
    compute_histogram,
)

VARIANCE_FLOOR = 1e-2
EM_TOL = 1e-6
EM_MAX_ITERS = 100
PRIOR_MODES = ("uniform", "proportion")

_UNDERFLOW = 1e-300


@dataclass(frozen=True, eq=False)
class GaussianMixtureModel:
    """``C`` Gaussian components (weight, mean, variance) over intensity."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        v = np.asarray(self.variances, dtype=np.float64)
        if not (w.ndim == mu.ndim == v.ndim == 1 and w.size == mu.size == v.size):
            raise ValueError("weights, means and variances must be 1-D and equally long")
        if w.size < 2:
            raise ValueError("a mixture needs at least two components")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(mu)) and np.all(np.isfinite(v))):
            raise ValueError("mixture parameters must be finite")
        if w.min() < 0 or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if v.min() < VARIANCE_FLOOR * (1 - 1e-12):
            raise ValueError(f"variances must be >= {VARIANCE_FLOOR}")
        for name, a in (("weights", w), ("means", mu), ("variances", v)):
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def num_classes(self) -> int:
        return self.weights.size

    def sorted(self) -> "GaussianMixtureModel":
        order = np.argsort(self.means, kind="stable")
        return GaussianMixtureModel(self.weights[order], self.means[order], self.variances[order])

    def densities(self, x: np.ndarray) -> np.ndarray:
        """Component densities at intensities ``x``, shape ``x.shape + (C,)``."""
        x = np.asarray(x, dtype=np.float64)[..., None]
        v = self.variances
        return np.exp(-((x - self.means) ** 2) / (2.0 * v)) / np.sqrt(2.0 * math.pi * v)


@dataclass(frozen=True, eq=False)
class Priors:
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.values, dtype=np.float64)
        if p.ndim != 1 or p.size == 0 or p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("priors must be a non-negative vector summing to 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "values", p)

    @classmethod
    def uniform(cls, num_classes: int) -> "Priors":
        return cls(np.full(num_classes, 1.0 / num_classes))


def init_model_from_otsu(image: GrayImage, num_classes: int) -> GaussianMixtureModel:
    """Seed a mixture from the strata of a ``num_classes - 1`` threshold Otsu split."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    hist = compute_histogram(image)
    if hist.nonempty_bins.size < num_classes:
        raise DegenerateInputError(
            f"image has {hist.nonempty_bins.size} distinct intensities, "
            f"fewer than {num_classes} classes"
        )
    thresholds = multi_otsu(hist, num_classes - 1).thresholds
    bounds = [0, *thresholds, hist.num_bins]
    levels = np.arange(hist.num_bins, dtype=np.float64)
    p = hist.probabilities
    weights, means, variances = [], [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        pc = p[lo:hi]
        w = pc.sum()
        mu = (levels[lo:hi] * pc).sum() / w
        var = ((levels[lo:hi] - mu) ** 2 * pc).sum() / w
        weights.append(w)
        means.append(mu)
        variances.append(max(var, VARIANCE_FLOOR))
    weights = np.asarray(weights)
    return GaussianMixtureModel(weights / weights.sum(), means, variances)


def _log_component_densities(x: np.ndarray, model: GaussianMixtureModel) -> np.ndarray:
    v = model.variances
    return (
        -((x[:, None] - model.means) ** 2) / (2.0 * v)
        - 0.5 * np.log(2.0 * math.pi * v)
    )


def _weighted_log_joint(x, model):
    with np.errstate(divide="ignore"):
        return _log_component_densities(x, model) + np.log(model.weights)


def _logsumexp(a: np.ndarray) -> np.ndarray:
    top = a.max(axis=1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    return (top + np.log(np.exp(a - top).sum(axis=1, keepdims=True)))[:, 0]


def _log_likelihood(x, counts, model) -> float:
    return float((counts * _logsumexp(_weighted_log_joint(x, model))).sum())


def _em_step(x, counts, model) -> GaussianMixtureModel:
    lj = _weighted_log_joint(x, model)
    resp = np.exp(lj - _logsumexp(lj)[:, None]) * counts[:, None]
    nk = resp.sum(axis=0)
    total = counts.sum()
    means = model.means.copy()
    variances = model.variances.copy()
    live = nk > 0
    means[live] = (resp[:, live] * x[:, None]).sum(axis=0) / nk[live]
    variances[live] = (resp[:, live] * (x[:, None] - means[live]) ** 2).sum(axis=0) / nk[live]
    variances = np.maximum(variances, VARIANCE_FLOOR)
    weights = nk / total
    return GaussianMixtureModel(weights / weights.sum(), means, variances)


def em_refine_histogram(
    hist: Histogram,
    model: GaussianMixtureModel,
    max_iters: int = EM_MAX_ITERS,
    tol: float = EM_TOL,
) -> tuple[GaussianMixtureModel, list[float]]:
    """EM on a gray-level histogram, each bin a sample weighted by its count."""
    if not isinstance(model, GaussianMixtureModel):
        raise ValueError("model must be a GaussianMixtureModel")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    x = np.arange(hist.num_bins, dtype=np.float64)
    counts = hist.counts.astype(np.float64)
    trace = [_log_likelihood(x, counts, model)]
    for _ in range(max_iters):
        model = _em_step(x, counts, model)
        trace.append(_log_likelihood(x, counts, model))
        prev, cur = trace[-2], trace[-1]
        if abs(cur - prev) < tol * max(abs(prev), 1e-300):
            break
    return model.sorted(), trace


def em_refine(
    image: GrayImage,
    model: GaussianMixtureModel,
    max_iters: int = EM_MAX_ITERS,
    tol: float = EM_TOL,
) -> tuple[GaussianMixtureModel, list[float]]:
    """Refine ``model`` by EM; returns the sorted model and the log-likelihood trace.

    The trace starts with the log-likelihood of the input model and gains
    one entry per EM step. Iteration stops once the relative change falls
    below ``tol`` or after ``max_iters`` steps. Per-pixel EM and
    histogram EM coincide for quantized intensities, so the work is done on
    the histogram.
    """
    return em_refine_histogram(compute_histogram(image), model, max_iters, tol)


def priors_from_counts(counts) -> Priors:
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0 or counts.min() < 0:
        raise ValueError("counts must be a non-empty vector of non-negative values")
    total = counts.sum()
    if total <= 0:
        raise ValueError("counts must not all be zero")
    return Priors(counts / total)


def class_likelihoods(image: GrayImage, model: GaussianMixtureModel) -> MembershipImage:
    """Per-pixel Gaussian density under each component, priors excluded."""
    table = model.densities(np.arange(image.levels))
    return MembershipImage(table[image.pixels], normalized=False)


def posterior(likelihoods: MembershipImage, priors: Priors) -> MembershipImage:
    """Normalize likelihood x prior per pixel.

    Pixels whose evidence underflows get the uniform vector.
    """
    if priors.values.size != likelihoods.num_classes:
        raise ValueError(
            f"{priors.values.size} priors for {likelihoods.num_classes} classes"
        )
    joint = likelihoods.values * priors.values
    evidence = joint.sum(axis=2, keepdims=True)
    c = likelihoods.num_classes
    with np.errstate(divide="ignore", invalid="ignore"):
        post = np.where(evidence >= _UNDERFLOW, joint / evidence, 1.0 / c)
    return MembershipImage(post, normalized=True)


def map_label(memberships: MembershipImage) -> LabelMap:
    """Arg-max class per pixel, lowest index on ties."""
    return LabelMap(np.argmax(memberships.values, axis=2), memberships.num_classes)


def _resolve_priors(priors_mode: str, model: GaussianMixtureModel) -> Priors:
    if priors_mode == "uniform":
        return Priors.uniform(model.num_classes)
    if priors_mode == "proportion":
        return Priors(model.weights)
    raise ValueError(f"priors_mode must be one of {PRIOR_MODES}, got {priors_mode!r}")


def bayes_posteriors(
    image: GrayImage,
    num_classes: int,
    priors_mode: str = "uniform",
    em_iters: int = EM_MAX_ITERS,
) -> tuple[MembershipImage, GaussianMixtureModel]:
    """Fit the mixture and return per-pixel posteriors with the model."""
    if priors_mode not in PRIOR_MODES:
        raise ValueError(f"priors_mode must be one of {PRIOR_MODES}, got {priors_mode!r}")
    if em_iters < 0:
        raise ValueError("em_iters must be >= 0")
    model = init_model_from_otsu(image, num_classes)
    if em_iters > 0:
        model, _ = em_refine(image, model, max_iters=em_iters)
    post = posterior(class_likelihoods(image, model), _resolve_priors(priors_mode, model))
    return post, model


def classify_bayes(
    image: GrayImage,
    num_classes: int,
    priors_mode: str = "uniform",
    em_iters: int = EM_MAX_ITERS,
) -> tuple[LabelMap, GaussianMixtureModel]:
    """MAP labeling under an Otsu-seeded, EM-refined Gaussian mixture.

    ``em_iters=0`` classifies straight from the Otsu-seeded model.
    """
    post, model = bayes_posteriors(image, num_classes, priors_mode, em_iters)
    return map_label(post), model
