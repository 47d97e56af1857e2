"""Binary and multi-level Otsu thresholding.

A threshold ``k`` splits the gray levels into a low class ``0..k-1`` and a
high class ``k..L-1``. Class statistics over any level range come from the
histogram prefix tables in O(1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import DegenerateInputError, GrayImage, Histogram, LabelMap

MAX_MULTI_THRESHOLDS = 4

# Objective values within this relative distance of the maximum are ties;
# ties go to the smallest threshold (tuple).
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ClassSplit:
    k: int
    P1: float
    P2: float
    m1: float
    m2: float
    var1: float
    var2: float
    degenerate: bool


@dataclass(frozen=True)
class GlobalStats:
    m_G: float
    sigma_T: float


@dataclass(frozen=True)
class OtsuResult:
    thresholds: tuple[int, ...]
    sigma_b: float
    eta: float


def _check_threshold(hist: Histogram, k) -> int:
    if int(k) != k or not 1 <= k <= hist.num_bins - 1:
        raise ValueError(f"threshold {k} outside [1, {hist.num_bins - 1}]")
    return int(k)


def _class_moments(p: np.ndarray, levels: np.ndarray) -> tuple[float, float, float]:
    P = float(p.sum())
    if P <= 0:
        return 0.0, 0.0, 0.0
    m = float((levels * p).sum()) / P
    var = float(((levels - m) ** 2 * p).sum()) / P
    return P, m, var


def split_statistics(hist: Histogram, k: int) -> ClassSplit:
    """Priors, means and variances of the two classes split at ``k``.

    Variances are summed directly over each class range rather than taken
    from prefix tables, which keeps them free of cancellation error.
    """
    k = _check_threshold(hist, k)
    p = hist.probabilities
    levels = np.arange(hist.num_bins, dtype=np.float64)
    P1, m1, var1 = _class_moments(p[:k], levels[:k])
    P2, m2, var2 = _class_moments(p[k:], levels[k:])
    n1 = int(hist.cum_count[k - 1])
    degenerate = n1 == 0 or n1 == hist.total
    return ClassSplit(k, P1, P2, m1, m2, var1, var2, degenerate)


def global_stats(hist: Histogram) -> GlobalStats:
    levels = np.arange(hist.num_bins, dtype=np.float64)
    p = hist.probabilities
    m_G = float((levels * p).sum())
    sigma_T = float(((levels - m_G) ** 2 * p).sum())
    return GlobalStats(m_G, sigma_T)


def _between_class_variances(hist: Histogram, ks: np.ndarray) -> np.ndarray:
    """Vectorized two-class between-class variance for thresholds ``ks``."""
    ks = np.asarray(ks, dtype=np.int64)
    n1 = hist.cum_count[ks - 1]
    ok = (n1 > 0) & (n1 < hist.total)
    P1 = hist.cum_prob[ks - 1]
    P2 = hist.cum_prob[-1] - P1
    M1 = hist.cum_mean[ks - 1]
    M2 = hist.cum_mean[-1] - M1
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = M1 / P1
        m2 = M2 / P2
        m_T = P1 * m1 + P2 * m2
        sb = P1 * (m1 - m_T) ** 2 + P2 * (m2 - m_T) ** 2
    return np.where(ok, sb, 0.0)


def between_class_variance(hist: Histogram, k: int) -> float:
    k = _check_threshold(hist, k)
    return float(_between_class_variances(hist, np.array([k]))[0])


def separability(hist: Histogram, k: int) -> float:
    """Between-class variance at ``k`` divided by the total variance."""
    k = _check_threshold(hist, k)
    total = global_stats(hist).sigma_T
    if total <= 0:
        raise DegenerateInputError("separability undefined for a zero-variance histogram")
    return between_class_variance(hist, k) / total


def _first_near_max(values: np.ndarray) -> int:
    best = values.max()
    return int(np.flatnonzero(values >= best - _TIE_RTOL * abs(best))[0])


def _require_nonempty_bins(hist: Histogram, needed: int):
    have = hist.nonempty_bins.size
    if have < needed:
        raise DegenerateInputError(
            f"need at least {needed} distinct intensities, histogram has {have}"
        )


def otsu_threshold(hist: Histogram) -> OtsuResult:
    """Single threshold maximizing the between-class variance.

    Ties resolve to the smallest threshold.
    """
    _require_nonempty_bins(hist, 2)
    ks = np.arange(1, hist.num_bins)
    sb = _between_class_variances(hist, ks)
    best = _first_near_max(sb)
    sigma_b = float(sb[best])
    return OtsuResult((int(ks[best]),), sigma_b, sigma_b / global_stats(hist).sigma_T)


def multi_class_variance(hist: Histogram, thresholds) -> float:
    """Generalized between-class variance sum_c P_c (m_c - m_G)^2.

    Empty classes contribute nothing.
    """
    bounds = [0, *thresholds, hist.num_bins]
    m_G = float(hist.cum_mean[-1])
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        n = (hist.cum_count[hi - 1] if hi > 0 else 0) - (hist.cum_count[lo - 1] if lo > 0 else 0)
        if n == 0:
            continue
        P = hist.cum_prob[hi - 1] - (hist.cum_prob[lo - 1] if lo > 0 else 0.0)
        M = hist.cum_mean[hi - 1] - (hist.cum_mean[lo - 1] if lo > 0 else 0.0)
        total += P * (M / P - m_G) ** 2
    return float(total)


def multi_otsu(hist: Histogram, n: int) -> OtsuResult:
    """``n`` thresholds maximizing the generalized between-class variance.

    Only thresholds of the form ``b + 1`` for a non-empty bin ``b`` are
    candidates: any other tuple induces the same partition of the occupied
    levels as a lexicographically smaller candidate tuple. Because the
    objective equals ``sum_c S_c**2 / P_c - m_G**2`` (``S_c`` the class first
    moment) it splits over classes, so the exhaustive maximum over candidate
    tuples is found by dynamic programming over class boundaries. Ties go to
    the lexicographically smallest tuple.
    """
    if int(n) != n or not 1 <= n <= MAX_MULTI_THRESHOLDS:
        raise ValueError(f"threshold count must be in [1, {MAX_MULTI_THRESHOLDS}], got {n}")
    n = int(n)
    _require_nonempty_bins(hist, n + 1)
    if n == 1:
        return otsu_threshold(hist)

    occupied = hist.nonempty_bins
    cand = occupied[:-1] + 1
    # boundary positions: 0, candidates..., L
    bounds = np.concatenate(([0], cand, [hist.num_bins]))
    cp = np.concatenate(([0.0], hist.cum_prob))
    cm = np.concatenate(([0.0], hist.cum_mean))
    cc = np.concatenate(([0], hist.cum_count))
    P = cp[bounds][None, :] - cp[bounds][:, None]
    S = cm[bounds][None, :] - cm[bounds][:, None]
    N = cc[bounds][None, :] - cc[bounds][:, None]
    nb = bounds.size
    upper = np.triu(np.ones((nb, nb), dtype=bool), k=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where((N > 0) & upper, S * S / P, 0.0)
    term[~upper] = -np.inf

    last = nb - 1
    # tail[r][j]: best sum of the class terms after threshold r placed at j
    tail = [None] * (n + 1)
    tail[n] = term[:, last].copy()
    for r in range(n - 1, 0, -1):
        tail[r] = (term + tail[r + 1][None, :]).max(axis=1)

    chosen = []
    prev = 0
    target = None
    for r in range(1, n + 1):
        scores = term[prev, :] + tail[r]
        scores[0] = -np.inf
        scores[last] = -np.inf
        if target is None:
            target = scores.max()
        j = int(np.flatnonzero(scores >= target - _TIE_RTOL * abs(target))[0])
        chosen.append(j)
        target = tail[r][j]
        prev = j

    thresholds = tuple(int(bounds[j]) for j in chosen)
    sigma_b = multi_class_variance(hist, thresholds)
    return OtsuResult(thresholds, sigma_b, sigma_b / global_stats(hist).sigma_T)


def apply_thresholds(image: GrayImage, thresholds) -> LabelMap:
    """Label each pixel with the number of thresholds at or below its value."""
    t = np.asarray(list(thresholds), dtype=np.int64)
    if t.size and (np.any(np.diff(t) <= 0) or t[0] < 1 or t[-1] > image.levels - 1):
        raise ValueError(f"thresholds must be strictly ascending within [1, {image.levels - 1}]")
    labels = np.searchsorted(t, image.pixels, side="right")
    return LabelMap(labels, t.size + 1)
