#!/usr/bin/env python3
"""Compare all methods on a planted-hierarchy dataset.

Generates synthetic data with a known class tree, runs the hierarchical
max-margin method against the k-means baselines, and prints SP/PS/RI plus
runtimes.

Usage: python scripts/run_planted_experiment.py [--seed 0] [--per-class 50]
"""

import argparse
import time

import numpy as np

from margintree import (
    BuildConfig,
    RegularizerConfig,
    SolverConfig,
    StoppingCriterion,
    SyntheticSpec,
    build_hierarchy,
    build_hkm,
    build_hkm_d,
    generate_synthetic,
    kmeans,
    leaf_partition,
    rand_index,
    semantic_score,
    subset,
)
from margintree.cli import _flat_hierarchy
from margintree.metrics import semantic_score_partition


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-class", type=int, default=50)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--alpha", type=float, default=1e-2)
    parser.add_argument("--beta", type=float, default=1e-2)
    args = parser.parse_args()

    spec = SyntheticSpec(per_class=args.per_class, seed=args.seed)
    dataset, truth = generate_synthetic(spec)
    n_classes = spec.n_classes
    print(f"planted data: N={dataset.n} P={dataset.p} classes={n_classes}\n")

    reg = RegularizerConfig(alpha=args.alpha, beta=args.beta)
    stop = StoppingCriterion(max_leaves=n_classes)

    def hmmc():
        cfg = BuildConfig(k=args.k, stop=stop, reg=reg, solver=SolverConfig(), seed=args.seed)
        return build_hierarchy(dataset, cfg)

    def hkm():
        cfg = BuildConfig(k=args.k, stop=stop, reg=reg, solver=SolverConfig(), seed=args.seed)
        return build_hkm(dataset, cfg)

    def hkm_d():
        cfg = BuildConfig(k=args.k, stop=stop, reg=reg, solver=SolverConfig(), seed=args.seed)
        return build_hkm_d(dataset, cfg)

    def km_flat():
        result = kmeans(subset(dataset, np.arange(dataset.n)), n_classes, seed=args.seed)
        return _flat_hierarchy(dataset, result.labels, result.centroids)

    def mmc_flat():
        cfg = BuildConfig(
            k=n_classes, stop=StoppingCriterion(max_leaves=n_classes),
            reg=reg, solver=SolverConfig(), seed=args.seed,
        )
        return build_hierarchy(dataset, cfg)

    print(f"{'method':<12} {'SP':>8} {'PS':>8} {'RI':>8} {'time':>8}")
    for name, builder in (("hmmc", hmmc), ("hkm", hkm), ("hkm_d", hkm_d),
                          ("kmeans_flat", km_flat), ("mmc_flat", mmc_flat)):
        started = time.perf_counter()
        hierarchy = builder()
        elapsed = time.perf_counter() - started
        part = leaf_partition(hierarchy)
        pred = np.array([part[i] for i in range(dataset.n)])
        ri = rand_index(pred, dataset.labels)
        flat = all(node.depth <= 1 for node in hierarchy.nodes.values())
        if flat:
            sp = semantic_score_partition(pred, None, truth, dataset.labels, "SP")
            ps = semantic_score_partition(pred, None, truth, dataset.labels, "PS")
        else:
            sp = semantic_score(hierarchy, truth, dataset, "SP")
            ps = semantic_score(hierarchy, truth, dataset, "PS")
        print(f"{name:<12} {sp:8.4f} {ps:8.4f} {ri:8.4f} {elapsed:7.1f}s")


if __name__ == "__main__":
    main()
