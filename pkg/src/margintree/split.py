"""Splitting one node: balance bounds, seeded initialization, alternating
descent between the weight update and the balanced assignment, and the
splitting score used by the greedy hierarchy builder.

The alternation fixes labels and solves for weights (convex), then fixes
weights and solves the balanced assignment exactly by min-cost flow; both
half-steps can only lower the split objective (up to the fixed-point
quantization of assignment costs), so the sequence of objective values is
non-increasing and terminates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import AncestorChain, ClusterModels, NodeData
from .errors import SolverError, UnsplittableNodeError
from .flow import DEFAULT_SCALE, solve_balanced_assignment
from .kmeans import kmeans
from .objective import RegularizerConfig, cost_matrix, exclusive_reg, group_reg, node_objective
from .optim import SolverConfig, solve_w

logger = logging.getLogger(__name__)

REL_OBJ_TOL = 1e-6


@dataclass(frozen=True)
class BalanceBounds:
    lower: int
    upper: int


@dataclass(frozen=True)
class SplitResult:
    models: ClusterModels
    labels: np.ndarray
    objective: float
    score: float
    iterations: int
    trace: tuple[float, ...] = ()


def balance_bounds(n: int, k: int) -> BalanceBounds:
    """Cluster-size bounds floor(0.9 n/K) and ceil(1.1 n/K), repaired to
    feasibility when rounding breaks K*L <= n <= K*U.

    Integer arithmetic throughout (0.9 = 9/10) so results never depend on
    float rounding.
    """
    if k < 2:
        raise UnsplittableNodeError(f"need at least 2 clusters, got {k}")
    if n < k:
        raise UnsplittableNodeError(f"cannot split {n} instances into {k} clusters")
    lower = (9 * n) // (10 * k)
    upper = -((-11 * n) // (10 * k))
    if k * lower > n:
        lower = n // k
    if k * upper < n:
        upper = -((-n) // k)
    return BalanceBounds(lower=lower, upper=upper)


def init_assignment(data: NodeData, k: int, bounds: BalanceBounds, seed: int) -> np.ndarray:
    """Seeded k-means labels repaired to the balance bounds by solving the
    assignment with squared-distance costs."""
    result = kmeans(data, k, seed)
    x = data.features
    costs = ((x[:, None, :] - result.centroids[None, :, :]) ** 2).sum(axis=2)
    return solve_balanced_assignment(costs, bounds.lower, bounds.upper, DEFAULT_SCALE)


def splitting_score(result: SplitResult, data: NodeData, chain: AncestorChain, reg: RegularizerConfig) -> float:
    """Fit-to-assignment score sum over instances divided by the model
    complexity G + E; -inf sentinel when the models are all zero (such a
    candidate is never selected)."""
    w = result.models.weights
    denom = group_reg(w) + exclusive_reg(w, chain)
    if denom == 0.0:
        return float("-inf")
    scores = data.features @ w.T
    numer = float(scores[np.arange(data.size), result.labels - 1].sum())
    return numer / denom


def split_node(
    data: NodeData,
    chain: AncestorChain,
    k: int,
    reg: RegularizerConfig,
    cfg: SolverConfig,
    seed: int,
    max_alternations: int = 50,
) -> SplitResult:
    """Alternate weight fitting and balanced assignment until the labels
    reach a fixed point, the relative objective change drops below 1e-6, or
    the alternation budget runs out."""
    bounds = balance_bounds(data.size, k)
    labels = init_assignment(data, k, bounds, seed)
    w0 = ClusterModels(weights=np.zeros((k, data.features.shape[1])))
    models = solve_w(data, labels, chain, reg, cfg, w0)
    objective = node_objective(models, labels, chain, data, reg)
    trace = [objective]
    # quantization of costs in the flow solver can lift the objective by at
    # most ~(K-1)/scale per instance; allow that much slack in the descent check
    slack = (k - 1) / DEFAULT_SCALE + 1e-9

    iterations = 0
    for iterations in range(1, max_alternations + 1):
        costs = cost_matrix(models, data)
        new_labels = solve_balanced_assignment(costs, bounds.lower, bounds.upper, DEFAULT_SCALE)
        after_assign = node_objective(models, new_labels, chain, data, reg)
        if after_assign > trace[-1] + slack * max(1.0, abs(trace[-1])):
            raise SolverError(
                f"objective rose after assignment half-step: {trace[-1]:.12e} -> {after_assign:.12e}"
            )
        if np.array_equal(new_labels, labels):
            iterations -= 1
            break
        labels = new_labels
        trace.append(after_assign)

        models = solve_w(data, labels, chain, reg, cfg, models)
        objective = node_objective(models, labels, chain, data, reg)
        if objective > after_assign + 1e-9 * max(1.0, abs(after_assign)):
            raise SolverError(
                f"objective rose after weight half-step: {after_assign:.12e} -> {objective:.12e}"
            )
        trace.append(objective)
        rel_change = (trace[-3] - objective) / max(1.0, abs(trace[-3]))
        if rel_change < REL_OBJ_TOL:
            break

    result = SplitResult(
        models=models,
        labels=labels,
        objective=trace[-1],
        score=float("nan"),
        iterations=iterations,
        trace=tuple(trace),
    )
    score = splitting_score(result, data, chain, reg)
    logger.debug("split converged: n=%d iterations=%d objective=%.6e score=%.6e", data.size, iterations, trace[-1], score)
    return SplitResult(
        models=models,
        labels=labels,
        objective=trace[-1],
        score=score,
        iterations=iterations,
        trace=tuple(trace),
    )
