"""Evaluation: tree-based semantic similarities and the Rand index.

Two leaf classes of a rooted class tree are compared either by shortest-path
distance (1 - d/d_max over the tree's leaf pairs) or by path sharing (length
of the common root prefix of their branches over the longer branch, with
branches including the leaf itself). A clustering is scored against ground
truth by 1 - MSE between learned and true pairwise similarities over
instance pairs; flat clusterings use the convention that two instances have
similarity 1 when co-clustered and 0 otherwise.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import Dataset, Hierarchy, leaf_partition
from .errors import StructureError, ValidationError


class ClassTree:
    """Rooted tree whose leaves carry class identifiers (each class at
    exactly one leaf). Similarity tables over classes are precomputed."""

    def __init__(self, root, children: dict, leaf_classes: dict):
        self.root = root
        self.children = {node: tuple(kids) for node, kids in children.items()}
        self.leaf_classes = dict(leaf_classes)

        reachable = set()
        stack = [root]
        while stack:
            node = stack.pop()
            if node in reachable:
                raise StructureError("class tree contains a cycle or repeated node")
            reachable.add(node)
            stack.extend(self.children.get(node, ()))
        for node in self.children:
            if node not in reachable:
                raise StructureError(f"node {node!r} is not reachable from the root")
        classes = list(self.leaf_classes.values())
        if len(set(classes)) != len(classes):
            raise StructureError("each class must appear at exactly one leaf")
        for leaf in self.leaf_classes:
            if leaf not in reachable:
                raise StructureError(f"leaf {leaf!r} is not in the tree")
            if self.children.get(leaf):
                raise StructureError(f"class node {leaf!r} is not a leaf")

        self._branches = {}
        def walk(node, prefix):
            branch = prefix + (node,)
            if node in self.leaf_classes:
                self._branches[self.leaf_classes[node]] = branch
            for kid in self.children.get(node, ()):
                walk(kid, branch)
        walk(root, ())

        self.class_ids = sorted(self._branches, key=repr)
        self._index = {c: i for i, c in enumerate(self.class_ids)}
        n = len(self.class_ids)
        self._dist = np.zeros((n, n))
        for (i, a), (j, b) in itertools.combinations(enumerate(self.class_ids), 2):
            d = self._path_distance(self._branches[a], self._branches[b])
            self._dist[i, j] = self._dist[j, i] = d
        self.max_distance = float(self._dist.max()) if n > 1 else 0.0

    @staticmethod
    def _path_distance(branch_a, branch_b) -> int:
        shared = 0
        for x, y in zip(branch_a, branch_b):
            if x != y:
                break
            shared += 1
        return (len(branch_a) - shared) + (len(branch_b) - shared)

    def branch(self, class_id) -> tuple:
        try:
            return self._branches[class_id]
        except KeyError:
            raise ValidationError(f"unknown class {class_id!r}") from None

    def sp_table(self) -> np.ndarray:
        if self.max_distance == 0.0:
            return np.ones_like(self._dist)
        return 1.0 - self._dist / self.max_distance

    def ps_table(self, include_leaf: bool = True) -> np.ndarray:
        n = len(self.class_ids)
        table = np.ones((n, n))
        for (i, a), (j, b) in itertools.combinations(enumerate(self.class_ids), 2):
            table[i, j] = table[j, i] = self._ps(self._branches[a], self._branches[b], include_leaf)
        return table

    @staticmethod
    def _ps(branch_a, branch_b, include_leaf: bool) -> float:
        if not include_leaf:
            branch_a, branch_b = branch_a[:-1], branch_b[:-1]
            if not branch_a or not branch_b:
                return 1.0
        shared = 0
        for x, y in zip(branch_a, branch_b):
            if x != y:
                break
            shared += 1
        return shared / max(len(branch_a), len(branch_b))

    def class_index(self, class_id) -> int:
        try:
            return self._index[class_id]
        except KeyError:
            raise ValidationError(f"unknown class {class_id!r}") from None


def shortest_path_similarity(tree: ClassTree, a, b) -> float:
    """1 - d(a,b)/d_max with d the tree edge distance between class leaves."""
    return float(tree.sp_table()[tree.class_index(a), tree.class_index(b)])


def path_sharing_similarity(tree: ClassTree, a, b, include_leaf: bool = True) -> float:
    """Shared root-prefix length over the longer branch; branches include the
    class leaf unless include_leaf=False (the stricter alternative reading)."""
    i, j = tree.class_index(a), tree.class_index(b)
    return float(tree.ps_table(include_leaf=include_leaf)[i, j])


def class_tree_from_hierarchy(hierarchy: Hierarchy) -> ClassTree:
    """View a learned hierarchy as a class tree whose classes are its leaf
    node ids."""
    children = {node.id: list(node.child_ids) for node in hierarchy.nodes.values() if node.child_ids}
    leaf_classes = {leaf.id: leaf.id for leaf in hierarchy.leaves()}
    return ClassTree(root=hierarchy.root_id, children=children, leaf_classes=leaf_classes)


def flat_class_tree(classes) -> ClassTree:
    """Depth-1 tree: a root whose children are the given classes."""
    classes = list(classes)
    children = {"__root__": [("__leaf__", c) for c in classes]}
    leaf_classes = {("__leaf__", c): c for c in classes}
    return ClassTree(root="__root__", children=children, leaf_classes=leaf_classes)


def rand_index(pred, truth) -> float:
    """Fraction of instance pairs on which the two partitions agree."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValidationError("partitions must be equal-length 1-D label arrays")
    n = pred.size
    if n < 2:
        return 1.0
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    contingency = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(contingency, (pi, ti), 1)
    same_both = (contingency * (contingency - 1) // 2).sum()
    same_pred = (np.bincount(pi) * (np.bincount(pi) - 1) // 2).sum()
    same_truth = (np.bincount(ti) * (np.bincount(ti) - 1) // 2).sum()
    total = n * (n - 1) // 2
    agreements = total + 2 * same_both - same_pred - same_truth
    return float(agreements / total)


def _pair_indices(n: int, pair_budget: int | None, seed: int):
    if pair_budget is None or pair_budget >= n * (n - 1) // 2:
        i, j = np.triu_indices(n, k=1)
        return i, j
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=pair_budget)
    j = rng.integers(0, n - 1, size=pair_budget)
    j = np.where(j >= i, j + 1, j)  # uniform over ordered pairs with i != j
    return i, j


def semantic_score_partition(
    cluster_codes: np.ndarray,
    learned_tree: ClassTree | None,
    truth: ClassTree,
    truth_labels,
    metric: str = "SP",
    pair_budget: int | None = None,
    seed: int = 0,
    include_leaf: bool = True,
) -> float:
    """1 - MSE between learned and ground-truth pairwise similarities.

    cluster_codes maps each instance to a learned class index; learned_tree
    gives the learned class similarities, or None for the flat convention
    (same cluster -> 1, else 0).
    """
    if metric not in ("SP", "PS"):
        raise ValidationError(f"metric must be SP or PS, got {metric!r}")
    truth_labels = np.asarray(truth_labels)
    n = truth_labels.size
    truth_codes = np.asarray([truth.class_index(c) for c in truth_labels])
    truth_table = truth.sp_table() if metric == "SP" else truth.ps_table(include_leaf)
    if learned_tree is not None:
        learned_table = learned_tree.sp_table() if metric == "SP" else learned_tree.ps_table(include_leaf)
    i, j = _pair_indices(n, pair_budget, seed)
    true_sim = truth_table[truth_codes[i], truth_codes[j]]
    if learned_tree is None:
        learned_sim = (cluster_codes[i] == cluster_codes[j]).astype(float)
    else:
        learned_sim = learned_table[cluster_codes[i], cluster_codes[j]]
    return float(1.0 - np.mean((learned_sim - true_sim) ** 2))


def semantic_score(
    learned: Hierarchy,
    truth: ClassTree,
    dataset: Dataset,
    metric: str = "SP",
    pair_budget: int | None = None,
    seed: int = 0,
    include_leaf: bool = True,
) -> float:
    """Score a learned hierarchy against the ground-truth class tree.

    A flat hierarchy (every leaf a child of the root) falls back to the
    same-cluster/else-0 similarity convention.
    """
    if dataset.labels is None:
        raise ValidationError("semantic scoring requires ground-truth labels")
    partition = leaf_partition(learned)
    leaf_of_instance = np.asarray([partition[i.item() if hasattr(i, "item") else i] for i in dataset.ids])
    flat = all(node.depth <= 1 for node in learned.nodes.values())
    if flat:
        codes = leaf_of_instance
        learned_tree = None
    else:
        learned_tree = class_tree_from_hierarchy(learned)
        codes = np.asarray([learned_tree.class_index(leaf_id) for leaf_id in leaf_of_instance])
    return semantic_score_partition(
        codes, learned_tree, truth, dataset.labels, metric, pair_budget, seed, include_leaf
    )
