"""Lloyd's k-means with k-means++ style seeding.

Deterministic given the seed; empty clusters are repaired by promoting the
point farthest from its assigned centroid. Labels are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NodeData
from .errors import ValidationError


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int


def _plus_plus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(k - 1):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a centroid; pick uniformly
            chosen.append(int(rng.integers(n)))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            chosen.append(min(idx, n - 1))
        d2 = np.minimum(d2, ((x - x[chosen[-1]]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def kmeans(data: NodeData, k: int, seed: int, max_iters: int = 300, tol: float = 1e-6) -> KMeansResult:
    x = data.features
    n = x.shape[0]
    if n < k:
        raise ValidationError(f"cannot fit {k} clusters to {n} instances")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(x, k, rng)
    labels = _assign(x, centroids)
    prev_inertia = np.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
            else:
                # repair: promote the point farthest from its centroid
                far = int(np.argmax(((x - centroids[labels]) ** 2).sum(axis=1)))
                centroids[j] = x[far]
                labels[far] = j
        new_labels = _assign(x, centroids)
        inertia = float(((x - centroids[new_labels]) ** 2).sum())
        converged = np.array_equal(new_labels, labels) or prev_inertia - inertia < tol
        labels = new_labels
        prev_inertia = inertia
        if converged:
            break
    inertia = float(((x - centroids[labels]) ** 2).sum())
    return KMeansResult(centroids=centroids, labels=labels + 1, inertia=inertia, iterations=iterations)
