"""Independent reference computations used by the tests.

Nothing here touches the histogram prefix tables or the dynamic program in
``tissueseg.otsu``; every quantity is recomputed from raw probabilities.
"""
import itertools
import math

import numpy as np

TIE_RTOL = 1e-12


def naive_between_class(p, k):
    """Two-class between-class variance from raw slice sums."""
    p = np.asarray(p, dtype=np.float64)
    i = np.arange(p.size, dtype=np.float64)
    P1 = p[:k].sum()
    P2 = p[k:].sum()
    if P1 == 0 or P2 == 0 or not np.any(p[:k]) or not np.any(p[k:]):
        return 0.0
    m1 = (i[:k] * p[:k]).sum() / P1
    m2 = (i[k:] * p[k:]).sum() / P2
    mT = P1 * m1 + P2 * m2
    return P1 * (m1 - mT) ** 2 + P2 * (m2 - mT) ** 2


def naive_otsu(p):
    """O(L^2) scan over k = 1..L-1; smallest k among near-maximal values."""
    values = [naive_between_class(p, k) for k in range(1, len(p))]
    best = max(values)
    for k, v in enumerate(values, start=1):
        if v >= best - TIE_RTOL * abs(best):
            return k, v


def naive_multi_variance(p, thresholds):
    p = np.asarray(p, dtype=np.float64)
    i = np.arange(p.size, dtype=np.float64)
    mG = (i * p).sum()
    bounds = [0, *thresholds, p.size]
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        P = p[lo:hi].sum()
        if P > 0:
            m = (i[lo:hi] * p[lo:hi]).sum() / P
            total += P * (m - mG) ** 2
    return total


def brute_multi_otsu_small(p, n):
    """Enumerate every ascending threshold tuple (small L only)."""
    best_t, best_v = None, -math.inf
    values = {}
    for t in itertools.combinations(range(1, len(p)), n):
        values[t] = naive_multi_variance(p, t)
        best_v = max(best_v, values[t])
    for t in itertools.combinations(range(1, len(p)), n):
        if values[t] >= best_v - TIE_RTOL * abs(best_v):
            return t, values[t]


def brute_multi_otsu_vectorized(p, n):
    """Enumerate all ascending tuples for L = 256 using plain cumulative sums
    per chunk of leading thresholds (n = 2 or 3)."""
    p = np.asarray(p, dtype=np.float64)
    L = p.size
    i = np.arange(L, dtype=np.float64)
    c0 = np.concatenate(([0.0], np.cumsum(p)))
    c1 = np.concatenate(([0.0], np.cumsum(i * p)))
    mG = c1[-1]

    def term(lo, hi):
        P = c0[hi] - c0[lo]
        S = c1[hi] - c1[lo]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(P > 0, P * (S / P - mG) ** 2, 0.0)

    rows = []
    if n == 2:
        t1, t2 = np.triu_indices(L - 1, k=1)
        t1, t2 = t1 + 1, t2 + 1
        v = term(0, t1) + term(t1, t2) + term(t2, L)
        rows.append((np.stack([t1, t2], axis=1), v))
    elif n == 3:
        for a in range(1, L - 2):
            b, c = np.triu_indices(L - 1, k=1)
            b, c = b + 1, c + 1
            keep = b > a
            b, c = b[keep], c[keep]
            v = term(0, a) + term(a, b) + term(b, c) + term(c, L)
            rows.append((np.stack([np.full(b.size, a), b, c], axis=1), v))
    else:
        raise ValueError("n must be 2 or 3")
    tuples = np.concatenate([r[0] for r in rows])
    values = np.concatenate([r[1] for r in rows])
    best = values.max()
    hits = np.flatnonzero(values >= best - TIE_RTOL * abs(best))
    # tuples were generated in lexicographic order
    j = hits[0]
    return tuple(int(t) for t in tuples[j]), float(values[j])


def direct_conv2d_clamped(plane, sigma, radius):
    """Direct 2-D convolution with the normalized bivariate Gaussian kernel."""
    offs = np.arange(-radius, radius + 1, dtype=np.float64)
    X, Y = np.meshgrid(offs, offs)
    k2 = np.exp(-(X**2 + Y**2) / (2 * sigma**2)) / (2 * math.pi * sigma**2)
    k2 /= k2.sum()
    h, w = plane.shape
    out = np.zeros_like(plane, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += k2[dy + radius, dx + radius] * plane[yy, xx]
            out[y, x] = acc
    return out


def normal_pdf(x, mu, var):
    return math.exp(-((x - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def random_counts(rng, L=256, sparsity=None):
    """Random integer histogram with at least two occupied bins."""
    while True:
        counts = rng.integers(0, 1000, size=L)
        if sparsity is None:
            sparsity = rng.uniform(0.0, 0.9)
        counts[rng.random(L) < sparsity] = 0
        if np.count_nonzero(counts) >= 2:
            return counts
