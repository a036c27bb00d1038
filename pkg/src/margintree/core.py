"""Domain types shared by all modules: datasets, node data, cluster models,
tree nodes and the hierarchy, plus subsetting and ancestor-chain extraction.

Cluster labels are 1-based everywhere ({1..K}); node ids are assigned in
creation order starting at 1 (root = 1). Models carry no bias term: scores
are plain inner products w.x, so callers should center their features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError, ValidationError


@dataclass(frozen=True, eq=False)
class Dataset:
    """An N x P feature matrix with stable instance ids and optional labels.

    labels are ground-truth class identifiers used for evaluation only; they
    never influence clustering.
    """

    features: np.ndarray
    ids: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValidationError(f"features must be a non-empty 2-D matrix, got shape {feats.shape}")
        if not np.all(np.isfinite(feats)):
            raise ValidationError("features contain NaN or Inf")
        ids = np.asarray(self.ids)
        if ids.shape != (feats.shape[0],):
            raise ValidationError("ids must have one entry per instance")
        if len(np.unique(ids)) != len(ids):
            raise ValidationError("instance ids must be unique")
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (feats.shape[0],):
                raise ValidationError("labels must have one entry per instance")
            object.__setattr__(self, "labels", labels)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class NodeData:
    """The slice of a Dataset owned by one tree node.

    Stores row positions rather than copies, so memory stays proportional to
    N per tree level.
    """

    parent: Dataset
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValidationError("indices must be 1-D")
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.parent.n:
                raise ValidationError("index out of range")
            if len(np.unique(idx)) != len(idx):
                raise ValidationError("duplicate index")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def features(self) -> np.ndarray:
        return self.parent.features[self.indices]

    @property
    def ids(self) -> np.ndarray:
        return self.parent.ids[self.indices]


@dataclass(frozen=True, eq=False)
class ClusterModels:
    """K x P weight matrix; row k is the linear model of cluster k."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] < 2:
            raise ValidationError(f"weights must be K x P with K >= 2, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights contain NaN or Inf")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def p(self) -> int:
        return self.weights.shape[1]


@dataclass
class TreeNode:
    """One node of the hierarchy.

    models / labels / split_score are set when the node is split; labels[i]
    in {1..K} gives the cluster of the i-th member (aligned with
    data.indices). For k-means-built trees the model rows are centroids.
    """

    id: int
    data: NodeData
    depth: int = 0
    parent_id: int | None = None
    child_ids: list[int] = field(default_factory=list)
    models: ClusterModels | None = None
    labels: np.ndarray | None = None
    split_score: float | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.child_ids


@dataclass
class Hierarchy:
    """Rooted tree of TreeNodes, mutated only by the single-threaded builder.

    incomplete is set when building stopped because no leaf was splittable
    before the stopping criterion was reached.
    """

    nodes: dict[int, TreeNode]
    root_id: int = 1
    incomplete: bool = False

    @classmethod
    def with_root(cls, dataset: Dataset) -> "Hierarchy":
        root = TreeNode(id=1, data=subset(dataset, np.arange(dataset.n)))
        return cls(nodes={1: root})

    def node(self, node_id: int) -> TreeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise StructureError(f"unknown node id {node_id}") from None

    @property
    def root(self) -> TreeNode:
        return self.node(self.root_id)

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.is_leaf]

    def height(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def non_leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if not n.is_leaf]


def subset(dataset: Dataset, indices) -> NodeData:
    """Select rows of a dataset by position (unique, in-range)."""
    return NodeData(parent=dataset, indices=np.asarray(indices, dtype=np.int64))


@dataclass(frozen=True)
class AncestorChain:
    """Per-ancestor (models, chosen_child) pairs from the root down to the
    node's parent; chosen_child in {1..K_a} is the child taken on the path.
    Empty for the root."""

    entries: tuple[tuple[ClusterModels, int], ...]

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_CHAIN = AncestorChain(entries=())


def ancestor_chain(hierarchy: Hierarchy, node_id: int) -> AncestorChain:
    """Walk root -> parent collecting each ancestor's models and which of its
    children leads to the target node."""
    node = hierarchy.node(node_id)
    entries = []
    child = node
    while child.parent_id is not None:
        parent = hierarchy.node(child.parent_id)
        if parent.models is None:
            raise StructureError(f"ancestor {parent.id} of node {node_id} has no fitted models")
        chosen = parent.child_ids.index(child.id) + 1
        entries.append((parent.models, chosen))
        child = parent
    entries.reverse()
    return AncestorChain(entries=tuple(entries))


def leaf_partition(hierarchy: Hierarchy) -> dict:
    """Map every instance id to the unique leaf node containing it."""
    mapping = {}
    for leaf in hierarchy.leaves():
        for instance_id in leaf.data.ids:
            key = instance_id.item() if hasattr(instance_id, "item") else instance_id
            if key in mapping:
                raise StructureError(f"instance {key} appears in more than one leaf")
            mapping[key] = leaf.id
    root_ids = hierarchy.root.data.ids
    if len(mapping) != len(root_ids):
        raise StructureError("leaves do not cover the root's instances")
    return mapping
