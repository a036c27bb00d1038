import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margintree import (
    ClassTree,
    Dataset,
    ValidationError,
    path_sharing_similarity,
    rand_index,
    semantic_score,
    shortest_path_similarity,
)
from margintree.metrics import flat_class_tree, semantic_score_partition
from helpers import manual_hierarchy


def balanced_tree():
    """root -> {n1, n2}; n1 -> {c1, c2}; n2 -> {c3, c4}."""
    return ClassTree(
        root="root",
        children={"root": ["n1", "n2"], "n1": ["c1", "c2"], "n2": ["c3", "c4"]},
        leaf_classes={"c1": "c1", "c2": "c2", "c3": "c3", "c4": "c4"},
    )


class TestShortestPath:
    def test_siblings(self):
        assert shortest_path_similarity(balanced_tree(), "c1", "c2") == pytest.approx(0.5)

    def test_diameter_pair(self):
        assert shortest_path_similarity(balanced_tree(), "c1", "c3") == 0.0

    def test_identity(self):
        assert shortest_path_similarity(balanced_tree(), "c1", "c1") == 1.0

    def test_unknown_class(self):
        with pytest.raises(ValidationError):
            shortest_path_similarity(balanced_tree(), "c1", "zz")

    def test_monotone_in_distance(self):
        tree = balanced_tree()
        assert (
            shortest_path_similarity(tree, "c1", "c1")
            > shortest_path_similarity(tree, "c1", "c2")
            > shortest_path_similarity(tree, "c1", "c3")
        )


class TestPathSharing:
    def test_siblings(self):
        assert path_sharing_similarity(balanced_tree(), "c1", "c2") == pytest.approx(2 / 3)

    def test_cross_pair(self):
        assert path_sharing_similarity(balanced_tree(), "c1", "c3") == pytest.approx(1 / 3)

    def test_identity(self):
        assert path_sharing_similarity(balanced_tree(), "c1", "c1") == 1.0

    def test_exclude_leaf_reading(self):
        tree = balanced_tree()
        assert path_sharing_similarity(tree, "c1", "c2", include_leaf=False) == 1.0
        assert path_sharing_similarity(tree, "c1", "c3", include_leaf=False) == 0.5

    def test_symmetry_and_bounds(self):
        tree = balanced_tree()
        for a in tree.class_ids:
            for b in tree.class_ids:
                sp = shortest_path_similarity(tree, a, b)
                ps = path_sharing_similarity(tree, a, b)
                assert 0.0 <= sp <= 1.0 and 0.0 <= ps <= 1.0
                assert sp == shortest_path_similarity(tree, b, a)
                assert ps == path_sharing_similarity(tree, b, a)


class TestRandIndex:
    def test_identical(self):
        assert rand_index([1, 1, 2, 2], [5, 5, 9, 9]) == 1.0

    def test_hand_value(self):
        assert rand_index([1, 2, 1, 2], [1, 1, 2, 2]) == pytest.approx(1 / 3)

    def test_singletons_vs_lump(self):
        assert rand_index([1, 2, 3], [1, 1, 1]) == 0.0

    def test_size_mismatch(self):
        with pytest.raises(ValidationError):
            rand_index([1, 2], [1, 2, 3])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_relabeling_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        pred = rng.integers(0, 4, n)
        truth = rng.integers(0, 4, n)
        remap = rng.permutation(4)
        assert rand_index(pred, truth) == pytest.approx(rand_index(remap[pred], truth))


def eight_instance_case(misplaced=True):
    """Fixed 8-instance / 4-class example; instance 3 (class c2) lands in the
    first learned leaf when misplaced."""
    truth = balanced_tree()
    labels = np.array(["c1", "c1", "c2", "c2", "c3", "c3", "c4", "c4"])
    ds = Dataset(features=np.zeros((8, 2)), ids=np.arange(8), labels=labels)
    first = [0, 1, 3] if misplaced else [0, 1]
    second = [2] if misplaced else [2, 3]
    learned = manual_hierarchy(
        ds,
        {1: [[0, 1, 2, 3], [4, 5, 6, 7]], 2: [first, second], 3: [[4, 5], [6, 7]]},
    )
    return ds, truth, learned


class TestSemanticScore:
    def test_perfect_hierarchy_scores_one(self):
        ds, truth, learned = eight_instance_case(misplaced=False)
        assert semantic_score(learned, truth, ds, "SP") == pytest.approx(1.0, abs=1e-12)
        assert semantic_score(learned, truth, ds, "PS") == pytest.approx(1.0, abs=1e-12)

    def test_hand_computed_misplacement(self):
        ds, truth, learned = eight_instance_case(misplaced=True)
        assert semantic_score(learned, truth, ds, "SP") == pytest.approx(109 / 112, abs=1e-12)
        assert semantic_score(learned, truth, ds, "PS") == pytest.approx(83 / 84, abs=1e-12)

    def test_flat_convention(self):
        ds, truth, _ = eight_instance_case()
        flat_labels = np.array([1, 1, 2, 2, 3, 3, 4, 4])
        sp = semantic_score_partition(flat_labels, None, truth, ds.labels, "SP")
        ps = semantic_score_partition(flat_labels, None, truth, ds.labels, "PS")
        assert sp == pytest.approx(13 / 14, abs=1e-12)
        assert ps == pytest.approx(17 / 21, abs=1e-12)

    def test_flat_hierarchy_uses_convention(self):
        ds, truth, _ = eight_instance_case()
        flat = manual_hierarchy(ds, {1: [[0, 1], [2, 3], [4, 5], [6, 7]]})
        assert semantic_score(flat, truth, ds, "SP") == pytest.approx(13 / 14, abs=1e-12)
        assert semantic_score(flat, truth, ds, "PS") == pytest.approx(17 / 21, abs=1e-12)

    def test_missing_labels_rejected(self):
        ds, truth, learned = eight_instance_case()
        unlabeled = Dataset(features=ds.features, ids=ds.ids)
        with pytest.raises(ValidationError):
            semantic_score(learned, truth, unlabeled, "SP")

    def test_sampled_close_to_full(self):
        ds, truth, learned = eight_instance_case()
        full = semantic_score(learned, truth, ds, "SP")
        sampled = semantic_score(learned, truth, ds, "SP", pair_budget=100000, seed=1)
        assert abs(full - sampled) <= 0.02

    def test_full_budget_equals_exhaustive(self):
        ds, truth, learned = eight_instance_case()
        assert semantic_score(learned, truth, ds, "SP", pair_budget=10**9) == semantic_score(
            learned, truth, ds, "SP"
        )


class TestFlatClassTree:
    def test_structure(self):
        tree = flat_class_tree(["a", "b", "c"])
        assert shortest_path_similarity(tree, "a", "a") == 1.0
        assert shortest_path_similarity(tree, "a", "b") == 0.0
        assert path_sharing_similarity(tree, "a", "b") == 0.5
