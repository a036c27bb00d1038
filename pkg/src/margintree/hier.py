"""Greedy top-down hierarchy construction with per-leaf split caching.

Every round evaluates a candidate split for each splittable leaf (reusing
cached candidates), finalizes the leaf with the highest splitting score
(ties to the lowest node id), and adds its K children as new leaves. A
leaf's candidate is computed once with a seed derived from the run seed and
the node id, so results do not depend on evaluation order and caching is
transparent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ClusterModels, Dataset, Hierarchy, TreeNode, ancestor_chain, subset
from .errors import UnsplittableNodeError, ValidationError
from .objective import RegularizerConfig, node_objective
from .optim import SolverConfig
from .split import SplitResult, split_node

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoppingCriterion:
    """Exactly one of: grow until max_leaves leaves exist; stop once every
    leaf is smaller than min_node_size; stop at a height limit."""

    max_leaves: int | None = None
    min_node_size: int | None = None
    max_height: int | None = None

    def __post_init__(self):
        set_fields = [v for v in (self.max_leaves, self.min_node_size, self.max_height) if v is not None]
        if len(set_fields) != 1:
            raise ValidationError("exactly one stopping bound must be set")
        if set_fields[0] < 1:
            raise ValidationError("the stopping bound must be >= 1")


@dataclass(frozen=True)
class BuildConfig:
    k: int
    stop: StoppingCriterion
    reg: RegularizerConfig
    solver: SolverConfig
    seed: int = 0
    max_alternations: int = 50

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"branching factor must be >= 2, got {self.k}")


def node_seed(seed: int, node_id: int) -> int:
    """Deterministic per-node seed; stable across platforms and evaluation
    order (unlike salted hash())."""
    return int(np.random.SeedSequence([seed, node_id]).generate_state(1)[0])


def should_stop(hierarchy: Hierarchy, stop: StoppingCriterion) -> bool:
    if stop.max_leaves is not None:
        return len(hierarchy.leaves()) >= stop.max_leaves
    if stop.min_node_size is not None:
        return all(leaf.data.size < stop.min_node_size for leaf in hierarchy.leaves())
    return hierarchy.height() >= stop.max_height


@dataclass(frozen=True)
class _Candidate:
    labels: np.ndarray
    models: ClusterModels | None
    score: float


def grow_tree(
    dataset: Dataset,
    k: int,
    stop: StoppingCriterion,
    evaluate: Callable[[Hierarchy, TreeNode, int], _Candidate],
) -> Hierarchy:
    """Shared greedy builder used by the max-margin method and the k-means
    baselines; `evaluate` returns a leaf's candidate split (labels, models,
    score) given its derived seed."""
    if dataset.n < k:
        raise ValidationError(f"dataset of {dataset.n} instances cannot be split into {k} clusters")
    hierarchy = Hierarchy.with_root(dataset)
    cache: dict[int, _Candidate | None] = {}
    next_id = 2
    round_no = 0

    while not should_stop(hierarchy, stop):
        for leaf in sorted(hierarchy.leaves(), key=lambda node: node.id):
            if leaf.id in cache:
                continue
            if leaf.data.size < k:
                cache[leaf.id] = None
                continue
            try:
                cache[leaf.id] = evaluate(hierarchy, leaf, leaf.id)
            except UnsplittableNodeError:
                cache[leaf.id] = None

        candidates = [
            (leaf.id, cache[leaf.id])
            for leaf in hierarchy.leaves()
            if cache.get(leaf.id) is not None and np.isfinite(cache[leaf.id].score)
        ]
        if not candidates:
            hierarchy.incomplete = True
            logger.warning("no splittable leaf remains before the stopping criterion was met")
            break
        best_id, best = max(candidates, key=lambda item: (item[1].score, -item[0]))

        node = hierarchy.node(best_id)
        node.models = best.models
        node.labels = best.labels
        node.split_score = best.score
        for cluster in range(1, k + 1):
            member_positions = node.data.indices[best.labels == cluster]
            child = TreeNode(
                id=next_id,
                data=subset(dataset, member_positions),
                depth=node.depth + 1,
                parent_id=node.id,
            )
            hierarchy.nodes[next_id] = child
            node.child_ids.append(next_id)
            next_id += 1
        round_no += 1
        logger.info(
            "round %d: split node %d (score %.6e), %d leaves",
            round_no,
            best_id,
            best.score,
            len(hierarchy.leaves()),
            extra={"round": round_no, "node": best_id, "score": best.score, "leaves": len(hierarchy.leaves())},
        )
    return hierarchy


def build_hierarchy(dataset: Dataset, config: BuildConfig) -> Hierarchy:
    """Greedy max-margin hierarchy over the dataset."""

    def evaluate(hierarchy: Hierarchy, leaf: TreeNode, node_id: int) -> _Candidate:
        result: SplitResult = split_node(
            leaf.data,
            ancestor_chain(hierarchy, leaf.id),
            config.k,
            config.reg,
            config.solver,
            node_seed(config.seed, leaf.id),
            config.max_alternations,
        )
        return _Candidate(labels=result.labels, models=result.models, score=result.score)

    return grow_tree(dataset, config.k, config.stop, evaluate)


def global_objective(hierarchy: Hierarchy, dataset: Dataset, reg: RegularizerConfig) -> float:
    """Sum of the per-split objectives over all fitted non-leaf nodes
    (reporting only; the builder never materializes this)."""
    total = 0.0
    for node in hierarchy.non_leaves():
        if node.models is None or node.labels is None:
            raise ValidationError(f"non-leaf node {node.id} has no fitted split")
        chain = ancestor_chain(hierarchy, node.id)
        total += node_objective(node.models, node.labels, chain, node.data, reg)
    return total
