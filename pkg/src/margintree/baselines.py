"""Hierarchical k-means baselines sharing the greedy top-down builder.

HKM scores a leaf by how compact its candidate clusters are (negated average
within-cluster distance, so argmax picks the most compact). HKM-D instead
grows the leaf with the most scattered data, independent of the candidate
split. Both split a node with plain seeded k-means; the fitted centroids are
stored in the node's model slot.
"""

from __future__ import annotations

import numpy as np

from .core import ClusterModels, Dataset, Hierarchy, NodeData, TreeNode
from .hier import BuildConfig, _Candidate, grow_tree, node_seed
from .kmeans import KMeansResult, kmeans


def hkm_split_score(result: KMeansResult, data: NodeData, pairwise: bool = False) -> float:
    """Negated average within-cluster distance of a fitted k-means split.

    By default "distance" means distance to the assigned centroid;
    pairwise=True averages over within-cluster point pairs instead.
    """
    x = data.features
    labels0 = result.labels - 1
    if not pairwise:
        dists = np.linalg.norm(x - result.centroids[labels0], axis=1)
        return -float(dists.mean())
    total = 0.0
    count = 0
    for j in range(result.centroids.shape[0]):
        members = x[labels0 == j]
        m = members.shape[0]
        if m < 2:
            continue
        diffs = np.linalg.norm(members[:, None, :] - members[None, :, :], axis=2)
        total += diffs[np.triu_indices(m, k=1)].sum()
        count += m * (m - 1) // 2
    return -(total / count) if count else 0.0


def hkm_d_split_score(data: NodeData) -> float:
    """Total distance of a node's instances to their mean (scatter)."""
    x = data.features
    center = x.mean(axis=0)
    return float(np.linalg.norm(x - center, axis=1).sum())


def _kmeans_candidate(leaf: TreeNode, k: int, seed: int) -> tuple[KMeansResult, _Candidate]:
    result = kmeans(leaf.data, k, seed)
    models = ClusterModels(weights=result.centroids) if k >= 2 else None
    return result, _Candidate(labels=result.labels, models=models, score=0.0)


def build_hkm(dataset: Dataset, config: BuildConfig) -> Hierarchy:
    """Top-down k-means, growing the leaf whose split is most compact."""

    def evaluate(hierarchy: Hierarchy, leaf: TreeNode, node_id: int) -> _Candidate:
        result, cand = _kmeans_candidate(leaf, config.k, node_seed(config.seed, node_id))
        return _Candidate(labels=cand.labels, models=cand.models, score=hkm_split_score(result, leaf.data))

    return grow_tree(dataset, config.k, config.stop, evaluate)


def build_hkm_d(dataset: Dataset, config: BuildConfig) -> Hierarchy:
    """Top-down k-means, growing the leaf with the most scattered data."""

    def evaluate(hierarchy: Hierarchy, leaf: TreeNode, node_id: int) -> _Candidate:
        _, cand = _kmeans_candidate(leaf, config.k, node_seed(config.seed, node_id))
        return _Candidate(labels=cand.labels, models=cand.models, score=hkm_d_split_score(leaf.data))

    return grow_tree(dataset, config.k, config.stop, evaluate)
