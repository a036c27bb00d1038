import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from margintree import (
    ClusterModels,
    RegularizerConfig,
    SolverConfig,
    hinge_loss,
    node_objective,
    prox_group,
    prox_sparse_group,
    prox_weighted_l1,
    solve_w,
    subset,
)
from margintree.core import EMPTY_CHAIN
from margintree.optim import make_prox_spec
from helpers import blob_dataset
from test_objective import chain_of
from oracles import (
    gradient_descent_smooth_oracle,
    prox_objective,
    prox_optimality_residual,
    subgradient_prox_oracle,
)


class TestProxWeightedL1:
    def test_below_threshold(self):
        assert prox_weighted_l1(np.array([[0.5]]), 1.0) == 0.0

    def test_shrinks_both_signs(self):
        out = prox_weighted_l1(np.array([[3.0, -3.0]]), 1.0)
        assert np.allclose(out, [[2.0, -2.0]])

    def test_zero_threshold_identity(self):
        w = np.random.default_rng(0).normal(size=(3, 4))
        assert np.array_equal(prox_weighted_l1(w, 0.0), w)

    def test_per_feature_thresholds(self):
        w = np.array([[2.0, 2.0], [2.0, 2.0]])
        out = prox_weighted_l1(w, np.array([0.5, 3.0]))
        assert np.allclose(out, [[1.5, 0.0], [1.5, 0.0]])


class TestProxGroup:
    def test_hand_column(self):
        out = prox_group(np.array([[3.0], [4.0]]), 1.0)
        assert np.allclose(out, [[2.4], [3.2]])

    def test_small_column_zeroed(self):
        out = prox_group(np.array([[0.3], [0.4]]), 1.0)
        assert np.array_equal(out, [[0.0], [0.0]])

    def test_zero_threshold_identity(self):
        w = np.random.default_rng(1).normal(size=(2, 5))
        assert np.array_equal(prox_group(w, 0.0), w)

    def test_zero_column_stays_zero(self):
        w = np.zeros((3, 2))
        w[:, 1] = [1.0, 2.0, 2.0]
        out = prox_group(w, 0.5)
        assert np.array_equal(out[:, 0], np.zeros(3))


def random_prox_instance(rng):
    k = int(rng.integers(2, 5))
    p = int(rng.integers(2, 9))
    w = rng.normal(size=(k, p)) * rng.uniform(0.5, 2.0)
    alpha = float(rng.uniform(0.0, 2.0))
    beta = float(rng.uniform(0.0, 2.0))
    lam_e = rng.uniform(0.0, 1.0, size=p)
    s = float(rng.uniform(0.05, 2.0))
    return w, alpha, beta, lam_e, s


def spec_for(alpha, beta, lam_e, k, p):
    chain = chain_of(lam_e * (k * 1 * p))  # ancestor row chosen so lambda_e reproduces exactly
    reg = RegularizerConfig(alpha=alpha, beta=beta, variant="sparse_group")
    return make_prox_spec(reg, chain, k, p)


class TestProxSparseGroup:
    def test_zero_thresholds_identity(self):
        rng = np.random.default_rng(2)
        w = rng.normal(size=(3, 4))
        spec = spec_for(0.0, 0.0, np.zeros(4), 3, 4)
        assert np.allclose(prox_sparse_group(w, spec, 1.0), w)

    def test_lambda_e_reconstruction(self):
        # the helper chain must reproduce the requested lambda_e exactly
        rng = np.random.default_rng(3)
        lam_e = rng.uniform(0, 1, size=6)
        spec = spec_for(1.0, 1.0, lam_e, 2, 6)
        assert np.allclose(spec.l1_thresholds, lam_e)

    def test_two_step_composition_on_2x2(self):
        w = np.array([[10.0, 0.1], [10.0, 0.1]])
        spec = spec_for(60.0, 0.0, np.zeros(2), 2, 2)  # group threshold = 60/(2*2) = 15
        out = prox_sparse_group(w, spec, 1.0)
        # column norms: ~14.14 and ~0.14, both below 15 -> all zero
        assert np.array_equal(out, np.zeros((2, 2)))

    def test_matches_subgradient_descent(self):
        rng = np.random.default_rng(4)
        for _ in range(12):
            w, alpha, beta, lam_e, s = random_prox_instance(rng)
            k, p = w.shape
            spec = spec_for(alpha, beta, lam_e, k, p)
            ours = prox_sparse_group(w, spec, s)
            _, oracle_val = subgradient_prox_oracle(w, s, alpha, beta, lam_e, iters=8000)
            assert prox_objective(ours, w, s, alpha, beta, lam_e) <= oracle_val + 1e-6

    def test_optimality_residual(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            w, alpha, beta, lam_e, s = random_prox_instance(rng)
            k, p = w.shape
            spec = spec_for(alpha, beta, lam_e, k, p)
            ours = prox_sparse_group(w, spec, s)
            assert prox_optimality_residual(ours, w, s, alpha, beta, lam_e) <= 1e-6

    def test_squared_l2_closed_form(self):
        rng = np.random.default_rng(6)
        w = rng.normal(size=(2, 3))
        reg = RegularizerConfig(alpha=1.5, beta=0.0, variant="squared_l2")
        spec = make_prox_spec(reg, EMPTY_CHAIN, 2, 3)
        out = prox_sparse_group(w, spec, 2.0)
        assert np.allclose(out, w / (1.0 + 2.0 * 2.0 * 1.5 / 6.0))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_nonexpansive(self, seed):
        rng = np.random.default_rng(seed)
        k, p = int(rng.integers(2, 4)), int(rng.integers(1, 6))
        spec = spec_for(float(rng.uniform(0, 2)), float(rng.uniform(0, 2)), rng.uniform(0, 1, p), k, p)
        a = rng.normal(size=(k, p))
        b = rng.normal(size=(k, p))
        s = float(rng.uniform(0.01, 3.0))
        pa = prox_sparse_group(a, spec, s)
        pb = prox_sparse_group(b, spec, s)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


class TestSolveW:
    def separable_node(self):
        ds = blob_dataset(0, [[5.0, 0.0], [-5.0, 0.0]], per_blob=10, spread=0.3)
        nd = subset(ds, np.arange(ds.n))
        labels = np.repeat([1, 2], 10)
        return nd, labels

    def test_separable_drives_loss_to_zero(self):
        nd, labels = self.separable_node()
        reg = RegularizerConfig(alpha=0.0, beta=0.0)
        w = solve_w(nd, labels, EMPTY_CHAIN, reg, SolverConfig(), ClusterModels(np.zeros((2, 2))))
        assert hinge_loss(w, nd, labels) <= 1e-6

    def test_huge_alpha_returns_zero(self):
        nd, labels = self.separable_node()
        reg = RegularizerConfig(alpha=1e6, beta=0.0)
        w = solve_w(nd, labels, EMPTY_CHAIN, reg, SolverConfig(), ClusterModels(np.zeros((2, 2))))
        assert np.array_equal(w.weights, np.zeros((2, 2)))

    def test_final_objective_not_above_start(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            n, p = 15, 4
            ds = blob_dataset(int(rng.integers(1e6)), [[1.0] * p, [-1.0] * p], per_blob=n // 2 + 1, spread=1.0)
            nd = subset(ds, np.arange(ds.n))
            labels = rng.integers(1, 3, size=ds.n)
            reg = RegularizerConfig(alpha=0.1, beta=0.1)
            w0 = ClusterModels(rng.normal(size=(2, p)))
            w = solve_w(nd, labels, EMPTY_CHAIN, reg, SolverConfig(), w0)
            before = node_objective(w0, labels, EMPTY_CHAIN, nd, reg)
            after = node_objective(w, labels, EMPTY_CHAIN, nd, reg)
            assert after <= before + 1e-12

    def test_squared_l2_matches_gd_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            n = int(rng.integers(8, 21))
            p = int(rng.integers(2, 9))
            x = rng.normal(size=(n, p))
            labels = rng.integers(1, 3, size=n)
            alpha = float(rng.uniform(0.05, 0.5))
            from margintree import Dataset

            nd = subset(Dataset(features=x, ids=np.arange(n)), np.arange(n))
            reg = RegularizerConfig(alpha=alpha, beta=0.0, variant="squared_l2")
            w = solve_w(nd, labels, EMPTY_CHAIN, reg, SolverConfig(), ClusterModels(np.zeros((2, p))))
            ours = node_objective(w, labels, EMPTY_CHAIN, nd, reg)
            oracle = gradient_descent_smooth_oracle(x, labels, alpha, 2)
            assert ours <= oracle * (1 + 1e-4) + 1e-10

    def test_memory_zero_still_works(self):
        nd, labels = self.separable_node()
        reg = RegularizerConfig(alpha=0.01, beta=0.0)
        cfg = SolverConfig(lbfgs_memory=0, max_outer_iters=300)
        w = solve_w(nd, labels, EMPTY_CHAIN, reg, cfg, ClusterModels(np.zeros((2, 2))))
        assert hinge_loss(w, nd, labels) <= 0.05
