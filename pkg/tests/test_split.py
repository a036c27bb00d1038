import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margintree import (
    ClusterModels,
    RegularizerConfig,
    SolverConfig,
    UnsplittableNodeError,
    balance_bounds,
    hinge_loss,
    init_assignment,
    rand_index,
    split_node,
    splitting_score,
    subset,
)
from margintree.core import EMPTY_CHAIN
from margintree.split import SplitResult
from helpers import blob_dataset


class TestBalanceBounds:
    def test_nominal_factors(self):
        b = balance_bounds(100, 2)
        assert (b.lower, b.upper) == (45, 55)

    def test_small_n(self):
        b = balance_bounds(3, 2)
        assert (b.lower, b.upper) == (1, 2)

    def test_degenerate_two(self):
        b = balance_bounds(2, 2)
        assert (b.lower, b.upper) == (0, 2)

    def test_unsplittable(self):
        with pytest.raises(UnsplittableNodeError):
            balance_bounds(1, 2)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 5000), st.integers(2, 12))
    def test_always_feasible(self, n, k):
        if n < k:
            with pytest.raises(UnsplittableNodeError):
                balance_bounds(n, k)
            return
        b = balance_bounds(n, k)
        assert b.lower >= 0
        assert k * b.lower <= n <= k * b.upper


class TestInitAssignment:
    def test_separated_blobs_split_exactly(self):
        ds = blob_dataset(1, [[6.0, 0.0], [-6.0, 0.0]], per_blob=10, spread=0.4)
        nd = subset(ds, np.arange(20))
        labels = init_assignment(nd, 2, balance_bounds(20, 2), seed=0)
        assert rand_index(labels, ds.labels) == 1.0
        assert np.bincount(labels - 1).tolist() == [10, 10]

    def test_degenerate_points_balanced(self):
        from margintree import Dataset

        ds = Dataset(features=np.ones((20, 3)), ids=np.arange(20))
        nd = subset(ds, np.arange(20))
        labels = init_assignment(nd, 2, balance_bounds(20, 2), seed=0)
        sizes = np.bincount(labels - 1, minlength=2)
        assert sizes.min() >= 9 and sizes.max() <= 11

    def test_deterministic(self):
        ds = blob_dataset(2, [[3.0, 1.0], [-3.0, -1.0]], per_blob=12, spread=1.0)
        nd = subset(ds, np.arange(24))
        b = balance_bounds(24, 2)
        first = init_assignment(nd, 2, b, seed=5)
        second = init_assignment(nd, 2, b, seed=5)
        assert np.array_equal(first, second)


class TestSplitNode:
    def test_recovers_blobs(self):
        ds = blob_dataset(3, [[5.0, 0.0, 0.0], [-5.0, 0.0, 0.0]], per_blob=15, spread=0.5)
        nd = subset(ds, np.arange(30))
        res = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(1e-4, 1e-4), SolverConfig(), seed=0)
        assert rand_index(res.labels, ds.labels) == 1.0
        assert hinge_loss(res.models, nd, res.labels) <= 1e-4

    def test_zero_alternations(self):
        ds = blob_dataset(4, [[4.0, 0.0], [-4.0, 0.0]], per_blob=8, spread=0.5)
        nd = subset(ds, np.arange(16))
        res = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(0.01, 0.01), SolverConfig(), seed=0, max_alternations=0)
        init = init_assignment(nd, 2, balance_bounds(16, 2), seed=0)
        assert np.array_equal(res.labels, init)
        assert res.iterations == 0
        assert np.isfinite(res.objective)

    def test_monotone_trace_over_seeds(self):
        rng = np.random.default_rng(5)
        for trial in range(8):
            if trial % 2 == 0:
                ds = blob_dataset(trial, [[3.0, 0.0], [-3.0, 0.0]], per_blob=10, spread=1.0)
            else:
                from margintree import Dataset

                ds = Dataset(features=rng.normal(size=(20, 4)), ids=np.arange(20))
            nd = subset(ds, np.arange(20))
            res = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(0.01, 0.01), SolverConfig(), seed=trial)
            assert res.iterations <= 50
            for a, b in zip(res.trace, res.trace[1:]):
                assert b <= a + 1e-8 * max(1.0, abs(a))

    def test_cluster_sizes_within_bounds(self):
        ds = blob_dataset(6, [[2.0, 0.0], [-2.0, 0.0]], per_blob=11, spread=1.5)
        nd = subset(ds, np.arange(22))
        res = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(0.01, 0.01), SolverConfig(), seed=1)
        b = balance_bounds(22, 2)
        sizes = np.bincount(res.labels - 1, minlength=2)
        assert sizes.min() >= b.lower and sizes.max() <= b.upper

    def test_deterministic(self):
        ds = blob_dataset(7, [[2.0, 1.0], [-2.0, -1.0]], per_blob=10, spread=1.0)
        nd = subset(ds, np.arange(20))
        a = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(0.01, 0.01), SolverConfig(), seed=9)
        b = split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(0.01, 0.01), SolverConfig(), seed=9)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.models.weights, b.models.weights)
        assert a.objective == b.objective

    def test_too_small_node(self):
        ds = blob_dataset(8, [[0.0, 0.0]], per_blob=1)
        nd = subset(ds, [0])
        with pytest.raises(UnsplittableNodeError):
            split_node(nd, EMPTY_CHAIN, 2, RegularizerConfig(), SolverConfig(), seed=0)


class TestSplittingScore:
    def make_result(self, weights, labels):
        return SplitResult(
            models=ClusterModels(weights=weights),
            labels=np.asarray(labels),
            objective=0.0,
            score=0.0,
            iterations=0,
        )

    def test_hand_value(self):
        from margintree import Dataset

        ds = Dataset(features=np.array([[2.0, 0.0], [0.0, 2.0]]), ids=np.arange(2))
        nd = subset(ds, [0, 1])
        res = self.make_result(np.array([[1.0, 0.0], [0.0, 1.0]]), [1, 2])
        assert splitting_score(res, nd, EMPTY_CHAIN, RegularizerConfig()) == pytest.approx(8.0)

    def test_zero_models_sentinel(self):
        from margintree import Dataset

        ds = Dataset(features=np.ones((3, 2)), ids=np.arange(3))
        nd = subset(ds, np.arange(3))
        res = self.make_result(np.zeros((2, 2)), [1, 2, 1])
        assert splitting_score(res, nd, EMPTY_CHAIN, RegularizerConfig()) == float("-inf")

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        from margintree import Dataset

        x = rng.normal(size=(6, 3))
        ds = Dataset(features=x, ids=np.arange(6))
        nd = subset(ds, np.arange(6))
        w = rng.normal(size=(2, 3))
        labels = rng.integers(1, 3, size=6)
        s1 = splitting_score(self.make_result(w, labels), nd, EMPTY_CHAIN, RegularizerConfig())
        s2 = splitting_score(self.make_result(3.0 * w, labels), nd, EMPTY_CHAIN, RegularizerConfig())
        assert s1 == pytest.approx(s2, rel=1e-9)
