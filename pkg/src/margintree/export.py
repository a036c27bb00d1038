"""Hierarchy serialization: a JSON schema for round-tripping structure,
scores and leaf membership, and a Graphviz dot rendering.

Keys are emitted in sorted order and floats via repr, so two identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Hierarchy
from .errors import ValidationError

SCHEMA_NAME = "margintree-hierarchy"
SCHEMA_VERSION = 1


def hierarchy_to_dict(hierarchy: Hierarchy, top_features: int = 3) -> dict:
    """JSON-ready representation: per node id, parent, depth, member count,
    children, split score, the top-m features of split nodes ranked by the
    column norm of the models, and leaf member ids."""
    nodes = []
    for node_id in sorted(hierarchy.nodes):
        node = hierarchy.nodes[node_id]
        record = {
            "id": node.id,
            "parent": node.parent_id,
            "depth": node.depth,
            "size": node.data.size,
            "children": list(node.child_ids),
            "split_score": None if node.split_score is None else float(node.split_score),
        }
        if node.child_ids and node.models is not None:
            norms = np.linalg.norm(node.models.weights, axis=0)
            order = np.argsort(-norms, kind="stable")
            record["top_features"] = [int(i) for i in order[:top_features]]
        if node.is_leaf:
            record["members"] = [i.item() if hasattr(i, "item") else i for i in node.data.ids]
        nodes.append(record)
    return {
        "format": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "root": hierarchy.root_id,
        "incomplete": hierarchy.incomplete,
        "nodes": nodes,
    }


def _dict_to_dot(payload: dict) -> str:
    lines = ["digraph hierarchy {", "  node [shape=box];"]
    for record in payload["nodes"]:
        score = record.get("split_score")
        label = f"#{record['id']}\\nn={record['size']}"
        if score is not None and np.isfinite(score):
            label += f"\\nS={score:.6g}"
        lines.append(f'  n{record["id"]} [label="{label}"];')
    for record in payload["nodes"]:
        for child in record["children"]:
            lines.append(f"  n{record['id']} -> n{child};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def export_hierarchy(hierarchy: Hierarchy, path: str, format: str = "json", top_features: int = 3) -> None:
    """Write the hierarchy to path as json or Graphviz dot."""
    payload = hierarchy_to_dict(hierarchy, top_features=top_features)
    if format == "json":
        text = render_json(payload)
    elif format == "dot":
        text = _dict_to_dot(payload)
    else:
        raise ValidationError(f"unknown export format {format!r}; expected json or dot")
    with open(path, "w") as fh:
        fh.write(text)


@dataclass(frozen=True)
class HierarchySummary:
    """Structure-only view reloaded from an exported JSON file."""

    root: int
    incomplete: bool
    nodes: tuple[dict, ...]

    def leaf_members(self) -> dict:
        mapping = {}
        for record in self.nodes:
            if not record["children"]:
                for member in record.get("members", []):
                    mapping[member] = record["id"]
        return mapping

    def children_map(self) -> dict:
        return {r["id"]: list(r["children"]) for r in self.nodes if r["children"]}

    def depths(self) -> dict:
        return {r["id"]: r["depth"] for r in self.nodes}


def load_hierarchy_json(path: str) -> HierarchySummary:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != SCHEMA_NAME:
        raise ValidationError(f"{path}: not a {SCHEMA_NAME} file")
    return HierarchySummary(
        root=payload["root"],
        incomplete=payload.get("incomplete", False),
        nodes=tuple(payload["nodes"]),
    )


def summary_to_dot(summary: HierarchySummary) -> str:
    payload = {
        "nodes": sorted(
            (dict(r) for r in summary.nodes),
            key=lambda r: r["id"],
        )
    }
    return _dict_to_dot(payload)
