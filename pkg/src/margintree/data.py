"""Data ingestion, PCA preprocessing, and the planted-hierarchy generator.

The generator draws a complete class tree of the requested depth and
branching; tree level l owns its own block of informative feature
dimensions, set per class by the class's ancestor branch at that level
(+/- magnitude for binary branching, seeded sign patterns otherwise), plus
zero-mean noise dimensions. Isotropic Gaussian noise of the given scale is
added everywhere, so the planted tree is recoverable level by level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import ParseError, ValidationError
from .metrics import ClassTree


def _parse_float(token: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"cannot parse {token!r} as a number", line=line_no) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", line=line_no)
    return value


def _load_csv(path: str, label_column: bool) -> Dataset:
    rows = []
    labels = []
    width = None
    with open(path, newline="") as fh:
        for line_no, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"expected {width} columns, found {len(record)}", line=line_no)
            if label_column:
                labels.append(record[-1].strip())
                record = record[:-1]
            if not record:
                raise ParseError("no feature columns", line=line_no)
            rows.append([_parse_float(tok, line_no) for tok in record])
    if not rows:
        raise ParseError("file contains no data rows", line=1)
    features = np.asarray(rows, dtype=float)
    ids = np.arange(features.shape[0])
    return Dataset(features=features, ids=ids, labels=np.asarray(labels) if label_column else None)


def _load_libsvm(path: str) -> Dataset:
    parsed = []
    labels = []
    max_index = 0
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(tokens[0])
            entries = {}
            for tok in tokens[1:]:
                if ":" not in tok:
                    raise ParseError(f"expected index:value, found {tok!r}", line=line_no)
                idx_str, val_str = tok.split(":", 1)
                try:
                    idx = int(idx_str)
                except ValueError:
                    raise ParseError(f"bad feature index {idx_str!r}", line=line_no) from None
                if idx < 1:
                    raise ParseError(f"feature indices are 1-based, found {idx}", line=line_no)
                if idx in entries:
                    raise ParseError(f"duplicate feature index {idx}", line=line_no)
                entries[idx] = _parse_float(val_str, line_no)
            parsed.append(entries)
            max_index = max(max_index, max(entries, default=0))
    if not parsed:
        raise ParseError("file contains no data rows", line=1)
    if max_index == 0:
        raise ParseError("no feature values found", line=1)
    features = np.zeros((len(parsed), max_index))
    for row, entries in enumerate(parsed):
        for idx, value in entries.items():
            features[row, idx - 1] = value
    return Dataset(features=features, ids=np.arange(len(parsed)), labels=np.asarray(labels))


def load_dataset(path: str, format: str = "csv", label_column: bool = False) -> Dataset:
    """Load a dense dataset from csv (optional trailing label column) or
    libsvm sparse text (label field kept as ground truth)."""
    if format == "csv":
        return _load_csv(path, label_column)
    if format == "libsvm":
        return _load_libsvm(path)
    raise ValidationError(f"unknown format {format!r}; expected csv or libsvm")


def standardize(dataset: Dataset) -> Dataset:
    """Per-dimension standardization (constant dimensions pass through)."""
    x = dataset.features
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return Dataset(features=(x - mean) / std, ids=dataset.ids, labels=dataset.labels)


def pca_reduce(dataset: Dataset, d: int, center: bool = True) -> Dataset:
    """Project onto the top-d principal directions (descending variance;
    each component's largest-magnitude loading is made positive)."""
    x = dataset.features
    n, p = x.shape
    if not (1 <= d <= min(n, p)):
        raise ValidationError(f"d must lie in [1, min(N, P)] = [1, {min(n, p)}], got {d}")
    centered = x - x.mean(axis=0) if center else x
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:d]
    for row in range(d):
        lead = np.argmax(np.abs(components[row]))
        if components[row, lead] < 0:
            components[row] = -components[row]
    return Dataset(features=centered @ components.T, ids=dataset.ids, labels=dataset.labels)


@dataclass(frozen=True)
class SyntheticSpec:
    depth: int = 2
    branching: int = 2
    per_class: int = 50
    informative_dims: int = 10
    noise_dims: int = 10
    magnitudes: tuple[float, ...] = (5.0, 3.0)
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1 or self.branching < 2 or self.per_class < 1:
            raise ValidationError("depth >= 1, branching >= 2 and per_class >= 1 required")
        if self.informative_dims < 1 or self.noise_dims < 0:
            raise ValidationError("informative_dims >= 1 and noise_dims >= 0 required")
        if len(self.magnitudes) != self.depth:
            raise ValidationError("one magnitude per tree level required")
        if any(m <= 0 for m in self.magnitudes):
            raise ValidationError("magnitudes must be positive")
        if self.noise_scale < 0:
            raise ValidationError("noise_scale must be >= 0")

    @property
    def total_dims(self) -> int:
        return self.depth * self.informative_dims + self.noise_dims

    @property
    def n_classes(self) -> int:
        return self.branching ** self.depth


def _branch_pattern(level: int, branch: int, dims: int, branching: int, seed: int) -> np.ndarray:
    if branching == 2:
        return np.ones(dims) if branch == 0 else -np.ones(dims)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104729, level, branch]))
    return rng.choice([-1.0, 1.0], size=dims)


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, ClassTree]:
    """Planted-hierarchy dataset plus its ground-truth class tree.

    Class c's mean vector sets informative block l to
    magnitude_l * pattern(level l, branch of c at level l); class labels are
    the leaf indices 0..B^depth-1 in lexicographic branch order.
    """
    classes = [()]
    for _ in range(spec.depth):
        classes = [path + (b,) for path in classes for b in range(spec.branching)]

    p = spec.total_dims
    means = np.zeros((len(classes), p))
    for c, path in enumerate(classes):
        for level, branch in enumerate(path):
            lo = level * spec.informative_dims
            pattern = _branch_pattern(level, branch, spec.informative_dims, spec.branching, spec.seed)
            means[c, lo : lo + spec.informative_dims] = spec.magnitudes[level] * pattern

    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 15485863]))
    n = len(classes) * spec.per_class
    labels = np.repeat(np.arange(len(classes)), spec.per_class)
    features = means[labels] + rng.normal(0.0, spec.noise_scale, size=(n, p))
    dataset = Dataset(features=features, ids=np.arange(n), labels=labels)

    children: dict = {"r": []}
    leaf_classes = {}
    for c, path in enumerate(classes):
        node = "r"
        for level, branch in enumerate(path):
            child = node + f".{branch}"
            if child not in children.get(node, []):
                children.setdefault(node, []).append(child)
            node = child
        leaf_classes[node] = c
    truth = ClassTree(root="r", children=children, leaf_classes=leaf_classes)
    return dataset, truth
