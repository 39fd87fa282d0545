"""Estimate serialization: DOT for renderers, JSON for tooling and reload.

Orderings are total (nodes ascending, edges lexicographic) so identical
estimates always produce identical bytes; the JSON document is also the
on-disk estimate format loaded back by the CLI.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graphs import EdgeInfo, LocalGraphEstimate, QMatrix

FORMAT_VERSION = 1
DOT_HEADER = f"// format: pfsgraph-dot/{FORMAT_VERSION}"


def _node_name(estimate: LocalGraphEstimate, node: int) -> str:
    if estimate.names is not None and 1 <= node <= len(estimate.names):
        return estimate.names[node - 1]
    return f"X{node}"


def estimate_to_dict(estimate: LocalGraphEstimate) -> dict:
    nodes = []
    for node in sorted(estimate.nodes()):
        nodes.append({
            "id": node,
            "name": _node_name(estimate, node),
            "layer": estimate.layer.get(node),
            "group": estimate.groups.get(node),
        })
    edges = []
    for j, k in sorted(estimate.recorded_edges()):
        info = estimate.edge_info.get((j, k), EdgeInfo())
        edges.append({
            "a": j,
            "b": k,
            "q": estimate.qmatrix.entry(j, k),
            "efp": info.efp,
            "radius": info.radius,
        })
    return {
        "format_version": FORMAT_VERSION,
        "p": estimate.qmatrix.p,
        "radius": estimate.radius,
        "targets": sorted(estimate.targets),
        "config_hash": estimate.config_hash,
        "nodes": nodes,
        "edges": edges,
    }


def estimate_from_dict(doc: dict) -> LocalGraphEstimate:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported estimate format version {doc.get('format_version')!r}")
    p = int(doc["p"])
    values = np.ones((p, p))
    edge_info = {}
    for e in doc["edges"]:
        j, k, q = int(e["a"]), int(e["b"]), float(e["q"])
        values[j - 1, k - 1] = values[k - 1, j - 1] = q
        edge_info[(j, k)] = EdgeInfo(efp=e.get("efp"), radius=e.get("radius"))
    names = [f"X{j}" for j in range(1, p + 1)]
    layer = {}
    groups = {}
    for nd in doc["nodes"]:
        node = int(nd["id"])
        names[node - 1] = nd.get("name") or f"X{node}"
        if nd.get("layer") is not None:
            layer[node] = int(nd["layer"])
        if nd.get("group") is not None:
            groups[node] = nd["group"]
    return LocalGraphEstimate(
        targets=frozenset(int(t) for t in doc["targets"]),
        radius=int(doc["radius"]),
        qmatrix=QMatrix(values),
        layer=layer,
        edge_info=edge_info,
        names=tuple(names),
        groups=groups,
        config_hash=doc.get("config_hash", ""),
    )


def export_graph(estimate: LocalGraphEstimate, format: str = "dot") -> str:
    """Render the estimate as a DOT or JSON document (stable byte output)."""
    if format == "json":
        return json.dumps(estimate_to_dict(estimate), indent=2, sort_keys=True) + "\n"
    if format != "dot":
        raise ValueError(f"unknown export format {format!r}")
    lines = [DOT_HEADER, "graph estimate {"]
    for node in sorted(estimate.nodes()):
        attrs = [f'label="{_node_name(estimate, node)}"']
        if node in estimate.layer:
            attrs.append(f"layer={estimate.layer[node]}")
        if node in estimate.groups:
            attrs.append(f'group="{estimate.groups[node]}"')
        lines.append(f"  n{node} [{', '.join(attrs)}];")
    for j, k in sorted(estimate.recorded_edges()):
        q = estimate.qmatrix.entry(j, k)
        lines.append(f'  n{j} -- n{k} [label="{q:.3f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_estimate(estimate: LocalGraphEstimate, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(export_graph(estimate, "json"), encoding="utf-8")
    tmp.replace(path)


def load_estimate(path) -> LocalGraphEstimate:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return estimate_from_dict(doc)
