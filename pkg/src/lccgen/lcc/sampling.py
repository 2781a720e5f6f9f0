"""Coding-space sampling: random sum-to-one weights on local anchor patches.

A draw picks an anchor uniformly at random as the center, collects the
center's d nearest anchors (the center itself included), fills those slots
with Gaussian weights in ascending-distance order, and normalizes the
weights to sum 1.  Interpolation blends two codings linearly, which keeps
the sum-to-one property and never leaves the union of their supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Rng
from .core import AnchorSet, Coding

_MAX_REDRAWS = 64


class SamplingError(Exception):
    """Raised when Gaussian weights keep landing too close to sum zero."""


@dataclass
class SamplerConfig:
    d: int
    seed: int = 0
    min_abs_sum: float = 1e-2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.min_abs_sum <= 0:
            raise ValueError("min_abs_sum must be positive")


def knn(query, anchors: AnchorSet, k: int) -> np.ndarray:
    """Indices of the k anchors nearest the query point, ascending by
    distance, ties broken by lower index."""
    m = anchors.m
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, m], got {k}")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != anchors.d_b:
        raise ValueError(f"query has dim {q.shape[0]}, anchors have d_b={anchors.d_b}")
    diff = anchors.anchors - q[:, None]
    d2 = np.sum(diff * diff, axis=0)
    order = np.argsort(d2, kind="stable")  # stable sort = lowest-index ties
    return order[:k]


def neighbor_table(anchors: AnchorSet, d: int) -> np.ndarray:
    """Precomputed (m, d) kNN table, one row per center anchor.

    An anchor queried against its own set is at distance 0, so each center
    occupies the first slot of its row (barring exact duplicates, where the
    lower index wins)."""
    return np.stack(
        [knn(anchors.anchors[:, j], anchors, d) for j in range(anchors.m)]
    )


def _draw_on_neighborhood(neighbors, m, config: SamplerConfig, rng: Rng) -> Coding:
    for _ in range(_MAX_REDRAWS + 1):
        z = rng.normals(len(neighbors))
        s = float(z.sum())
        if abs(s) >= config.min_abs_sum:
            w = np.zeros(m)
            w[neighbors] = z / s
            # pin the sum to exactly 1 by absorbing rounding into the largest slot
            top = neighbors[int(np.argmax(np.abs(w[neighbors])))]
            w[top] -= w.sum() - 1.0
            return Coding(w)
    raise SamplingError(
        f"|sum(z)| stayed below {config.min_abs_sum} after {_MAX_REDRAWS} redraws"
    )


def sample_coding(anchors: AnchorSet, config: SamplerConfig, rng: Rng) -> Coding:
    """One random coding supported on a local neighborhood of the anchors."""
    if config.d > anchors.m:
        raise ValueError(f"d={config.d} exceeds anchor count m={anchors.m}")
    center = rng.randint(anchors.m)
    neighbors = knn(anchors.anchors[:, center], anchors, config.d)
    return _draw_on_neighborhood(neighbors, anchors.m, config, rng)


def sample_coding_pair(anchors: AnchorSet, config: SamplerConfig, rng: Rng):
    """Two codings drawn on the same neighborhood, for interpolation."""
    if config.d > anchors.m:
        raise ValueError(f"d={config.d} exceeds anchor count m={anchors.m}")
    center = rng.randint(anchors.m)
    neighbors = knn(anchors.anchors[:, center], anchors, config.d)
    a = _draw_on_neighborhood(neighbors, anchors.m, config, rng)
    b = _draw_on_neighborhood(neighbors, anchors.m, config, rng)
    return a, b


def interpolate(a: Coding, b: Coding, steps: int):
    """Linear path (1-t)*a + t*b over `steps` evenly spaced t in [0, 1].

    Endpoints reproduce a and b exactly; every intermediate coding sums to 1
    and is supported inside support(a) | support(b).
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if a.weights.shape != b.weights.shape:
        raise ValueError("codings must have the same length")
    out = []
    for k in range(steps):
        t = k / (steps - 1)
        out.append(Coding((1.0 - t) * a.weights + t * b.weights))
    return out
