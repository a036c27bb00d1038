"""Command-line toolkit: generate synthetic data, cluster, evaluate, export.

Configuration can be loaded from a flat key=value file (--config); explicit
command-line flags override file values. Exit codes: 0 success, 1 invalid
input or configuration, 2 solver or infeasibility failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import build_hkm, build_hkm_d
from .core import ClusterModels, Dataset, Hierarchy, TreeNode, leaf_partition, subset
from .data import SyntheticSpec, generate_synthetic, load_dataset, pca_reduce, standardize
from .errors import InfeasibleFlowError, SolverError, ValidationError
from .export import export_hierarchy, load_hierarchy_json, render_json, summary_to_dot
from .hier import BuildConfig, StoppingCriterion, build_hierarchy, global_objective
from .kmeans import kmeans
from .metrics import ClassTree, class_tree_from_hierarchy, flat_class_tree, rand_index, semantic_score_partition
from .objective import RegularizerConfig
from .optim import SolverConfig

logger = logging.getLogger(__name__)

METHODS = ("hmmc", "hkm", "hkm_d", "kmeans_flat", "mmc_flat")


@dataclass
class ExperimentSpec:
    input: str
    format: str = "csv"
    label_column: bool = False
    method: str = "hmmc"
    k: int = 2
    max_leaves: int | None = None
    min_node_size: int | None = None
    max_height: int | None = None
    alpha: float = 0.01
    beta: float = 0.01
    variant: str = "sparse_group"
    solver: SolverConfig = field(default_factory=SolverConfig)
    max_alternations: int = 50
    seed: int = 0
    restarts: int = 1
    pca_dim: int | None = None
    standardize: bool = True
    truth_tree: str | None = None
    hierarchy_out: str | None = None
    dot_out: str | None = None
    report_out: str | None = None
    top_features: int = 3
    pair_budget: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")

    def stopping(self) -> StoppingCriterion:
        chosen = {
            "max_leaves": self.max_leaves,
            "min_node_size": self.min_node_size,
            "max_height": self.max_height,
        }
        if all(v is None for v in chosen.values()):
            return StoppingCriterion(max_leaves=self.k)
        return StoppingCriterion(**chosen)


def restart_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([seed, 7919, restart]).generate_state(1)[0])


def save_class_tree(tree: ClassTree, path: str) -> None:
    payload = {
        "root": tree.root,
        "children": {str(k): list(v) for k, v in tree.children.items()},
        "leaf_classes": {str(k): v for k, v in tree.leaf_classes.items()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_class_tree(path: str) -> ClassTree:
    with open(path) as fh:
        payload = json.load(fh)
    return ClassTree(
        root=payload["root"],
        children={k: list(v) for k, v in payload["children"].items()},
        leaf_classes=payload["leaf_classes"],
    )


def _codes_for_labels(tree: ClassTree, labels) -> np.ndarray:
    """Map ground-truth labels to the tree's class indices, tolerant of
    int-vs-string round trips through files."""
    by_str = {str(c): i for i, c in enumerate(tree.class_ids)}
    try:
        return np.asarray([tree.class_index(c) for c in labels])
    except ValidationError:
        pass
    try:
        return np.asarray([by_str[str(c)] for c in labels])
    except KeyError as err:
        raise ValidationError(f"label {err.args[0]!r} not present in the truth tree") from None


def _flat_hierarchy(dataset: Dataset, labels: np.ndarray, centroids: np.ndarray) -> Hierarchy:
    """Wrap a flat partition as a depth-1 hierarchy for uniform export."""
    hierarchy = Hierarchy.with_root(dataset)
    root = hierarchy.root
    root.models = ClusterModels(weights=centroids)
    root.labels = labels
    k = centroids.shape[0]
    for cluster in range(1, k + 1):
        child = TreeNode(
            id=cluster + 1,
            data=subset(dataset, root.data.indices[labels == cluster]),
            depth=1,
            parent_id=root.id,
        )
        hierarchy.nodes[child.id] = child
        root.child_ids.append(child.id)
    return hierarchy


def _leaf_inertia(dataset: Dataset, hierarchy: Hierarchy) -> float:
    total = 0.0
    for leaf in hierarchy.leaves():
        x = leaf.data.features
        if x.shape[0]:
            total += float(((x - x.mean(axis=0)) ** 2).sum())
    return total


def _build_once(dataset: Dataset, spec: ExperimentSpec, seed: int) -> tuple[Hierarchy, float]:
    """Run one restart; returns the hierarchy and the method's own selection
    objective (lower is better, never an evaluation metric)."""
    reg = RegularizerConfig(alpha=spec.alpha, beta=spec.beta, variant=spec.variant)
    if spec.method in ("hmmc", "mmc_flat"):
        stop = StoppingCriterion(max_leaves=spec.k) if spec.method == "mmc_flat" else spec.stopping()
        config = BuildConfig(
            k=spec.k, stop=stop, reg=reg, solver=spec.solver, seed=seed, max_alternations=spec.max_alternations
        )
        hierarchy = build_hierarchy(dataset, config)
        return hierarchy, global_objective(hierarchy, dataset, reg)
    if spec.method in ("hkm", "hkm_d"):
        config = BuildConfig(k=spec.k, stop=spec.stopping(), reg=reg, solver=spec.solver, seed=seed)
        builder = build_hkm if spec.method == "hkm" else build_hkm_d
        hierarchy = builder(dataset, config)
        return hierarchy, _leaf_inertia(dataset, hierarchy)
    result = kmeans(subset(dataset, np.arange(dataset.n)), spec.k, seed)
    hierarchy = _flat_hierarchy(dataset, result.labels, result.centroids)
    return hierarchy, result.inertia


def _evaluate_against_truth(
    dataset: Dataset,
    partition_leaf_ids: np.ndarray,
    learned_tree: ClassTree | None,
    truth: ClassTree,
    pair_budget: int | None,
    seed: int,
) -> dict:
    metrics = {"rand_index": rand_index(partition_leaf_ids, dataset.labels)}
    if learned_tree is None:
        codes = partition_leaf_ids
    else:
        codes = np.asarray([learned_tree.class_index(leaf) for leaf in partition_leaf_ids])
    truth_codes = _codes_for_labels(truth, dataset.labels)
    relabeled = np.asarray([truth.class_ids[i] for i in truth_codes], dtype=object)
    for metric in ("SP", "PS"):
        metrics[metric.lower()] = semantic_score_partition(
            codes, learned_tree, truth, relabeled, metric, pair_budget, seed
        )
    return metrics


def run_experiment(spec: ExperimentSpec) -> dict:
    """Load data, run the method over its restarts keeping the best run by
    the method's own objective, score against ground truth when available,
    and write the requested outputs."""
    started = time.perf_counter()
    dataset = load_dataset(spec.input, spec.format, spec.label_column)
    if spec.pca_dim is not None:
        if spec.standardize:
            dataset = standardize(dataset)
        dataset = pca_reduce(dataset, spec.pca_dim)

    best: tuple[float, int, Hierarchy] | None = None
    for restart in range(spec.restarts):
        hierarchy, objective = _build_once(dataset, spec, restart_seed(spec.seed, restart))
        if best is None or objective < best[0]:
            best = (objective, restart, hierarchy)
    objective, chosen_restart, hierarchy = best

    report = {
        "method": spec.method,
        "params": {
            "k": spec.k,
            "alpha": spec.alpha,
            "beta": spec.beta,
            "variant": spec.variant,
            "seed": spec.seed,
            "restarts": spec.restarts,
            "pca_dim": spec.pca_dim,
        },
        "n_instances": dataset.n,
        "n_features": dataset.p,
        "leaf_count": len(hierarchy.leaves()),
        "objective": objective,
        "chosen_restart": chosen_restart,
        "incomplete": hierarchy.incomplete,
    }

    if dataset.labels is not None:
        truth = load_class_tree(spec.truth_tree) if spec.truth_tree else flat_class_tree(
            sorted({str(c) for c in dataset.labels})
        )
        partition = leaf_partition(hierarchy)
        leaf_ids = np.asarray([partition[i.item() if hasattr(i, "item") else i] for i in dataset.ids])
        flat = all(node.depth <= 1 for node in hierarchy.nodes.values())
        learned_tree = None if flat else class_tree_from_hierarchy(hierarchy)
        report["metrics"] = _evaluate_against_truth(
            dataset, leaf_ids, learned_tree, truth, spec.pair_budget, spec.seed
        )

    outputs = {}
    if spec.hierarchy_out:
        export_hierarchy(hierarchy, spec.hierarchy_out, "json", spec.top_features)
        outputs["hierarchy"] = spec.hierarchy_out
    if spec.dot_out:
        export_hierarchy(hierarchy, spec.dot_out, "dot", spec.top_features)
        outputs["dot"] = spec.dot_out
    report["outputs"] = outputs
    report["runtime_seconds"] = time.perf_counter() - started
    if spec.report_out:
        with open(spec.report_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path} line {line_no}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="margintree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a planted-hierarchy dataset and its truth tree")
    _add_common(gen)
    gen.add_argument("--out", required=True, help="output csv (features + trailing label column)")
    gen.add_argument("--truth-out", help="output json for the ground-truth class tree")
    gen.add_argument("--depth", type=int, default=2)
    gen.add_argument("--branching", type=int, default=2)
    gen.add_argument("--per-class", type=int, default=50)
    gen.add_argument("--informative-dims", type=int, default=10)
    gen.add_argument("--noise-dims", type=int, default=10)
    gen.add_argument("--magnitudes", default="5,3", help="comma-separated, one per level")
    gen.add_argument("--noise-scale", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)

    run = sub.add_parser("cluster", help="run a clustering method and write hierarchy/report")
    _add_common(run)
    run.add_argument("--input", required=True)
    run.add_argument("--format", choices=("csv", "libsvm"), default="csv")
    run.add_argument("--label-column", action="store_true")
    run.add_argument("--method", choices=METHODS, default="hmmc")
    run.add_argument("--k", type=int, default=2)
    run.add_argument("--max-leaves", type=int)
    run.add_argument("--min-node-size", type=int)
    run.add_argument("--max-height", type=int)
    run.add_argument("--alpha", type=float, default=0.01)
    run.add_argument("--beta", type=float, default=0.01)
    run.add_argument("--variant", choices=("sparse_group", "group_only", "exclusive_only", "l1", "squared_l2"),
                     default="sparse_group")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--restarts", type=int, default=1)
    run.add_argument("--max-outer-iters", type=int, default=100)
    run.add_argument("--lbfgs-memory", type=int, default=10)
    run.add_argument("--inner-prox-iters", type=int, default=25)
    run.add_argument("--rel-obj-tol", type=float, default=1e-8)
    run.add_argument("--max-alternations", type=int, default=50)
    run.add_argument("--pca-dim", type=int)
    run.add_argument("--no-standardize", action="store_true", help="skip per-dimension standardization before PCA")
    run.add_argument("--truth-tree")
    run.add_argument("--hierarchy-out")
    run.add_argument("--dot-out")
    run.add_argument("--report-out")
    run.add_argument("--top-features", type=int, default=3)
    run.add_argument("--pair-budget", type=int)

    ev = sub.add_parser("evaluate", help="score an exported hierarchy against ground truth")
    _add_common(ev)
    ev.add_argument("--hierarchy", required=True)
    ev.add_argument("--input", required=True)
    ev.add_argument("--format", choices=("csv", "libsvm"), default="csv")
    ev.add_argument("--label-column", action="store_true")
    ev.add_argument("--truth-tree")
    ev.add_argument("--report-out")
    ev.add_argument("--pair-budget", type=int)
    ev.add_argument("--seed", type=int, default=0)

    ex = sub.add_parser("export", help="convert an exported hierarchy json to dot")
    _add_common(ex)
    ex.add_argument("--hierarchy", required=True)
    ex.add_argument("--format", choices=("json", "dot"), default="dot")
    ex.add_argument("--out", required=True)

    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    file_values = _read_config_file(args.config)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, raw in file_values.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int) and not isinstance(current, bool):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        elif current is None:
            for convert in (int, float):
                try:
                    value = convert(raw)
                    break
                except ValueError:
                    continue
            else:
                value = raw
        else:
            value = raw
        setattr(args, key, value)
    return args


def _cmd_generate(args) -> int:
    magnitudes = tuple(float(tok) for tok in str(args.magnitudes).split(","))
    spec = SyntheticSpec(
        depth=args.depth,
        branching=args.branching,
        per_class=args.per_class,
        informative_dims=args.informative_dims,
        noise_dims=args.noise_dims,
        magnitudes=magnitudes,
        noise_scale=args.noise_scale,
        seed=args.seed,
    )
    dataset, truth = generate_synthetic(spec)
    with open(args.out, "w") as fh:
        for row, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label}\n")
    if args.truth_out:
        save_class_tree(truth, args.truth_out)
    print(f"wrote {dataset.n} instances x {dataset.p} features ({spec.n_classes} classes) to {args.out}")
    return 0


def _cmd_cluster(args) -> int:
    solver = SolverConfig(
        max_outer_iters=args.max_outer_iters,
        lbfgs_memory=args.lbfgs_memory,
        inner_prox_iters=args.inner_prox_iters,
        rel_obj_tol=args.rel_obj_tol,
    )
    spec = ExperimentSpec(
        input=args.input,
        format=args.format,
        label_column=args.label_column,
        method=args.method,
        k=args.k,
        max_leaves=args.max_leaves,
        min_node_size=args.min_node_size,
        max_height=args.max_height,
        alpha=args.alpha,
        beta=args.beta,
        variant=args.variant,
        solver=solver,
        max_alternations=args.max_alternations,
        seed=args.seed,
        restarts=args.restarts,
        pca_dim=args.pca_dim,
        standardize=not args.no_standardize,
        truth_tree=args.truth_tree,
        hierarchy_out=args.hierarchy_out,
        dot_out=args.dot_out,
        report_out=args.report_out,
        top_features=args.top_features,
        pair_budget=args.pair_budget,
    )
    report = run_experiment(spec)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_evaluate(args) -> int:
    summary = load_hierarchy_json(args.hierarchy)
    dataset = load_dataset(args.input, args.format, args.label_column)
    if dataset.labels is None:
        raise ValidationError("evaluate requires ground-truth labels (--label-column or libsvm labels)")
    truth = load_class_tree(args.truth_tree) if args.truth_tree else flat_class_tree(
        sorted({str(c) for c in dataset.labels})
    )
    members = summary.leaf_members()
    try:
        leaf_ids = np.asarray([members[i.item() if hasattr(i, "item") else i] for i in dataset.ids])
    except KeyError as err:
        raise ValidationError(f"instance {err.args[0]!r} missing from the hierarchy's leaves") from None
    depths = summary.depths()
    flat = all(d <= 1 for d in depths.values())
    learned_tree = None
    if not flat:
        children = summary.children_map()
        leaf_classes = {r["id"]: r["id"] for r in summary.nodes if not r["children"]}
        learned_tree = ClassTree(root=summary.root, children=children, leaf_classes=leaf_classes)
    metrics = _evaluate_against_truth(dataset, leaf_ids, learned_tree, truth, args.pair_budget, args.seed)
    report = {"hierarchy": args.hierarchy, "input": args.input, "metrics": metrics}
    if args.report_out:
        with open(args.report_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    summary = load_hierarchy_json(args.hierarchy)
    if args.format == "dot":
        text = summary_to_dot(summary)
    else:
        payload = {
            "format": "margintree-hierarchy",
            "version": 1,
            "root": summary.root,
            "incomplete": summary.incomplete,
            "nodes": list(summary.nodes),
        }
        text = render_json(payload)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _apply_config(args, parser, argv)
        handler = {
            "generate": _cmd_generate,
            "cluster": _cmd_cluster,
            "evaluate": _cmd_evaluate,
            "export": _cmd_export,
        }[args.command]
        return handler(args)
    except (ValidationError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (SolverError, InfeasibleFlowError) as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
