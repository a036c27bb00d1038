"""Scalar terms of the per-node split objective.

A node split with K clusters over data D fits one linear model per cluster.
The loss is the averaged squared hinge over all wrong-cluster margins,

    H(w) = 1/(|D| K) * sum_i sum_{y != y_i} [1 - w_{y_i}.x_i + w_y.x_i]_+^2,

and the regularizers are the column-wise group norm

    G(w) = 1/(P K) * sum_p ||w_{:,p}||_2

and the exclusive overlap with the frozen ancestor-path models

    E(w) = 1/(K |A| P) * sum_k sum_a sum_p |w_{k,p}| * |ancestor_a_p|,

which for fixed ancestors is a weighted l1 norm with per-feature weights
lambda_E. At the root (no ancestors) E and lambda_E are identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AncestorChain, ClusterModels, NodeData
from .errors import ValidationError

VARIANTS = ("sparse_group", "group_only", "exclusive_only", "l1", "squared_l2")


@dataclass(frozen=True)
class RegularizerConfig:
    """Trade-off weights alpha (group/simple term) and beta (exclusive term),
    plus the variant toggle.

    Variants: sparse_group = alpha*G + beta*E; group_only = alpha*G;
    exclusive_only = beta*E; l1 and squared_l2 replace the pair with
    alpha*sum|w|/(K P) and alpha*sum w^2/(K P).
    """

    alpha: float = 0.01
    beta: float = 0.01
    variant: str = "sparse_group"

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValidationError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError(f"beta must be finite and >= 0, got {self.beta}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")


@dataclass(frozen=True)
class ExclusiveWeights:
    """Per-feature l1 weights lambda_E induced by the ancestor models."""

    lambda_e: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_e, dtype=float)
        if lam.ndim != 1 or not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ValidationError("lambda_e must be a finite non-negative vector")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambda_e", lam)


def _weights(models) -> np.ndarray:
    return models.weights if isinstance(models, ClusterModels) else np.asarray(models, dtype=float)


def _features(data) -> np.ndarray:
    return data.features if isinstance(data, NodeData) else np.asarray(data, dtype=float)


def _check_labels(labels, n: int, k: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ValidationError(f"expected {n} labels, got shape {y.shape}")
    if y.size and (y.min() < 1 or y.max() > k):
        raise ValidationError(f"labels must lie in 1..{k}")
    return y


def _pairwise_hinge(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    # out[i, y, y'] = [1 - w_y.x_i + w_y'.x_i]_+ with the y'=y diagonal zeroed
    scores = x @ w.T
    margins = 1.0 - scores[:, :, None] + scores[:, None, :]
    k = w.shape[0]
    margins[:, np.arange(k), np.arange(k)] = 0.0
    return np.maximum(margins, 0.0)


def cost_matrix(models, data) -> np.ndarray:
    """Per-instance, per-cluster assignment costs:
    cost[i, y] = sum_{y' != y} [1 - w_y.x_i + w_y'.x_i]_+^2."""
    w, x = _weights(models), _features(data)
    if w.shape[1] != x.shape[1]:
        raise ValidationError(f"model dimension {w.shape[1]} != feature dimension {x.shape[1]}")
    return (_pairwise_hinge(w, x) ** 2).sum(axis=2)


def hinge_loss(models, data, labels) -> float:
    """Averaged squared hinge loss of assigning each instance to its label."""
    w, x = _weights(models), _features(data)
    n, k = x.shape[0], w.shape[0]
    y = _check_labels(labels, n, k)
    costs = cost_matrix(w, x)
    return float(costs[np.arange(n), y - 1].sum() / (n * k))


def hinge_grad(models, data, labels) -> np.ndarray:
    """Exact gradient of hinge_loss with respect to the K x P weights."""
    w, x = _weights(models), _features(data)
    n, k = x.shape[0], w.shape[0]
    y0 = _check_labels(labels, n, k) - 1
    scores = x @ w.T
    rows = np.arange(n)
    margins = 1.0 - scores[rows, y0][:, None] + scores
    margins[rows, y0] = 0.0
    active = 2.0 * np.maximum(margins, 0.0)
    active[rows, y0] = -active.sum(axis=1)
    return (active.T @ x) / (n * k)


def group_reg(models) -> float:
    """Column-wise group norm G(w); zero iff w = 0."""
    w = _weights(models)
    return float(np.linalg.norm(w, axis=0).sum() / (w.shape[1] * w.shape[0]))


def exclusive_weights(chain: AncestorChain, k: int, p: int) -> ExclusiveWeights:
    """Per-feature l1 weights from the ancestor-path models; zero at the root."""
    if len(chain) == 0:
        return ExclusiveWeights(lambda_e=np.zeros(p))
    lam = np.zeros(p)
    for models, chosen_child in chain.entries:
        lam += np.abs(models.weights[chosen_child - 1])
    return ExclusiveWeights(lambda_e=lam / (k * len(chain) * p))


def exclusive_reg(models, chain: AncestorChain) -> float:
    """Overlap penalty E(w) against the frozen ancestor-path models."""
    w = _weights(models)
    if len(chain) == 0:
        return 0.0
    lam = exclusive_weights(chain, w.shape[0], w.shape[1]).lambda_e
    return float((np.abs(w) * lam).sum())


def regularizer_value(models, chain: AncestorChain, config: RegularizerConfig) -> float:
    """The variant-selected regularization term (everything except the hinge)."""
    w = _weights(models)
    k, p = w.shape
    if config.variant == "sparse_group":
        return config.alpha * group_reg(w) + config.beta * exclusive_reg(w, chain)
    if config.variant == "group_only":
        return config.alpha * group_reg(w)
    if config.variant == "exclusive_only":
        return config.beta * exclusive_reg(w, chain)
    if config.variant == "l1":
        return config.alpha * float(np.abs(w).sum()) / (k * p)
    return config.alpha * float((w**2).sum()) / (k * p)


def node_objective(models, labels, chain: AncestorChain, data, config: RegularizerConfig) -> float:
    """Full split objective: regularizer(s) plus the averaged squared hinge."""
    return regularizer_value(models, chain, config) + hinge_loss(models, data, labels)
