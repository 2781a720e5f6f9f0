"""Sample-quality metrics: kernel two-sample distance and a correlation
nearest-neighbor probe."""

from __future__ import annotations

import numpy as np


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a * a, axis=1)
    bb = np.sum(b * b, axis=1)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def median_pairwise_distance(xs) -> float:
    """Median distance over distinct pairs; the default kernel bandwidth."""
    a = np.asarray(xs, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2:
        raise ValueError("need at least two points")
    d2 = _pairwise_sq_dists(a, a)
    iu = np.triu_indices(a.shape[0], k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    if med <= 0.0:
        raise ValueError("median pairwise distance is zero; pass a bandwidth explicitly")
    return med


def mmd2(xs, ys, bandwidth: float) -> float:
    """Unbiased squared maximum mean discrepancy, Gaussian kernel
    exp(-||a-b||^2 / (2 bandwidth^2)).

    Within-set sums run over distinct pairs.  For equal sample sizes the
    cross term also excludes matched indices (so identical sets give exactly
    zero); otherwise all cross pairs are used.  Sets too small to form
    distinct pairs contribute 0 by convention.
    """
    a = np.asarray(xs, dtype=np.float64)
    b = np.asarray(ys, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] < 1 or b.shape[0] < 1:
        raise ValueError("xs and ys must be nonempty (n, dim) arrays")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if not bandwidth > 0.0:
        raise ValueError("bandwidth must be positive")
    m, n = a.shape[0], b.shape[0]
    if m < 2 or n < 2:
        return 0.0
    scale = -0.5 / (bandwidth * bandwidth)
    kxx = np.exp(scale * _pairwise_sq_dists(a, a))
    kyy = np.exp(scale * _pairwise_sq_dists(b, b))
    kxy = np.exp(scale * _pairwise_sq_dists(a, b))
    sxx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    syy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    if m == n:
        sxy = (kxy.sum() - np.trace(kxy)) / (m * (m - 1))
    else:
        sxy = kxy.mean()
    return float(sxx + syy - 2.0 * sxy)


def pearson_nn(query, corpus):
    """(index, distance) of the corpus row with smallest 1 - corr(query, row).

    Distances live in [0, 2]; ties resolve to the lowest index, and a row
    bitwise-equal to the query is distance exactly 0.  Constant vectors have
    no defined correlation and raise.
    """
    q = np.asarray(query, dtype=np.float64)
    c = np.asarray(corpus, dtype=np.float64)
    if q.ndim != 1 or c.ndim != 2 or c.shape[0] < 1 or c.shape[1] != q.shape[0]:
        raise ValueError("query must be (dim,), corpus (n, dim) nonempty")
    qc = q - q.mean()
    qn = float(np.sqrt(np.sum(qc * qc)))
    if qn == 0.0:
        raise ValueError("query has zero variance")
    cc = c - c.mean(axis=1, keepdims=True)
    cn = np.sqrt(np.sum(cc * cc, axis=1))
    flat = np.flatnonzero(cn == 0.0)
    if flat.size:
        raise ValueError(f"corpus row {int(flat[0])} has zero variance")
    exact = np.flatnonzero(np.all(c == q, axis=1))
    if exact.size:
        return int(exact[0]), 0.0
    corr = np.clip((cc @ qc) / (cn * qn), -1.0, 1.0)
    dist = 1.0 - corr
    idx = int(np.argmin(dist))
    return idx, float(dist[idx])
