"""Layered local graph estimation with pathwise stopping.

Starting from the targets, each layer's nodes get their neighborhood q-values
estimated; entries passing the applicable threshold are recorded into the
q-value matrix under the minimum or forward rule; nodes whose lightest
recorded path from the targets stays within the path threshold form the next
layer. Each node's neighborhood is estimated at most once.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Literal, Mapping

import numpy as np

from .data import DataMatrix
from .errors import EstimationError, PfsGraphError
from .graphs import (
    NO_EDGE,
    EdgeInfo,
    LocalGraphEstimate,
    QMatrix,
    hop_limited_distances,
    normalize_edge,
)
from .qvalues import EstimatorConfig, estimate_neighbor_qvalues

Rule = Literal["minimum", "forward"]


@dataclass(frozen=True)
class NodeThresholds:
    """Per-node overrides; ``intermodal``/``intramodal`` apply by group pair."""

    default: float | None = None
    intermodal: float | None = None
    intramodal: float | None = None

    def __post_init__(self):
        for v in (self.default, self.intermodal, self.intramodal):
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError("thresholds must lie in [0, 1]")


@dataclass(frozen=True)
class PfsConfig:
    """Inputs of the layered run: radii, thresholds, rule, estimator settings.

    ``q_r_default[r-1]`` is the neighborhood threshold at radius r. Resolution
    order for a (response j, candidate k) pair: explicit override for j
    (group-pair field first when groups are labeled) > global group-pair
    threshold > per-radius default.
    """

    r_max: int = 1
    q_r_default: tuple[float, ...] = (0.2,)
    q_path: float = 0.2
    rule: Rule = "minimum"
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    node_overrides: Mapping[int, NodeThresholds] = field(default_factory=dict)
    groups: Mapping[int, str] = field(default_factory=dict)
    intermodal_q: float | None = None
    intramodal_q: float | None = None

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be at least 1")
        q = tuple(float(v) for v in self.q_r_default)
        if len(q) == 1:
            q = q * self.r_max
        if len(q) != self.r_max:
            raise ValueError(f"need {self.r_max} per-radius thresholds, got {len(q)}")
        if any(not 0.0 <= v <= 1.0 for v in q):
            raise ValueError("neighborhood thresholds must lie in [0, 1]")
        if not 0.0 <= self.q_path <= 1.0:
            raise ValueError("q_path must lie in [0, 1]")
        if self.rule not in ("minimum", "forward"):
            raise ValueError(f"unknown rule {self.rule!r}")
        object.__setattr__(self, "q_r_default", q)
        object.__setattr__(self, "node_overrides", dict(self.node_overrides))
        object.__setattr__(self, "groups", dict(self.groups))

    def threshold_for(self, response: int, candidate: int, radius: int) -> float:
        override = self.node_overrides.get(response)
        pair = self._pair_kind(response, candidate)
        if override is not None:
            if pair is not None:
                v = override.intermodal if pair == "inter" else override.intramodal
                if v is not None:
                    return v
            if override.default is not None:
                return override.default
        if pair == "inter" and self.intermodal_q is not None:
            return self.intermodal_q
        if pair == "intra" and self.intramodal_q is not None:
            return self.intramodal_q
        return self.q_r_default[radius - 1]

    def _pair_kind(self, j: int, k: int) -> str | None:
        gj, gk = self.groups.get(j), self.groups.get(k)
        if gj is None or gk is None:
            return None
        return "intra" if gj == gk else "inter"

    def to_dict(self) -> dict:
        return {
            "r_max": self.r_max,
            "q_r_default": list(self.q_r_default),
            "q_path": self.q_path,
            "rule": self.rule,
            "estimator": self.estimator.to_dict(),
            "node_overrides": {
                str(j): {"default": o.default, "intermodal": o.intermodal, "intramodal": o.intramodal}
                for j, o in sorted(self.node_overrides.items())
            },
            "groups": {str(j): g for j, g in sorted(self.groups.items())},
            "intermodal_q": self.intermodal_q,
            "intramodal_q": self.intramodal_q,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PfsConfig":
        allowed = {"r_max", "q_r_default", "q_path", "rule", "estimator",
                   "node_overrides", "groups", "intermodal_q", "intramodal_q"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown pfs keys: {sorted(unknown)}")
        kw = dict(d)
        if "estimator" in kw:
            kw["estimator"] = EstimatorConfig.from_dict(kw["estimator"])
        if "q_r_default" in kw:
            kw["q_r_default"] = tuple(kw["q_r_default"])
        if "node_overrides" in kw:
            kw["node_overrides"] = {
                int(j): NodeThresholds(**{f: v for f, v in o.items() if v is not None})
                for j, o in kw["node_overrides"].items()
            }
        if "groups" in kw:
            kw["groups"] = {int(j): g for j, g in kw["groups"].items()}
        return cls(**kw)


def config_hash(config: PfsConfig) -> str:
    """Stable hash of the fully resolved configuration."""
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def node_seed(seed: int, node: int) -> int:
    """Per-node estimator seed; independent of iteration order."""
    return int(np.random.SeedSequence(entropy=(seed, node)).generate_state(1)[0])


def _apply_rule(values: np.ndarray, j: int, k: int, q: float, rule: Rule,
                layer: Mapping[int, int]) -> bool:
    """Apply one record event in place; True when the entry changed."""
    if j == k:
        raise ValueError("cannot record a self-edge")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q-value must lie in [0, 1]")
    a, b = j - 1, k - 1
    if rule == "minimum":
        new = min(q, float(values[a, b]))
    else:
        lj = layer.get(j)
        lk = layer.get(k)
        if lj is None:
            raise ValueError(f"forward rule needs a layer for the recording node {j}")
        farther = lk is None or lk > lj
        if farther:
            # forward direction: first assignment wins, reverse values ignored later
            new = q if values[a, b] >= NO_EDGE else float(values[a, b])
        elif lk == lj:
            new = min(q, float(values[a, b]))
        else:
            return False  # reverse direction, the closer node already had its turn
    if new != values[a, b]:
        values[a, b] = new
        values[b, a] = new
        return True
    return False


def record_edge(qmatrix: QMatrix, j: int, k: int, q: float, rule: Rule,
                layer: Mapping[int, int]) -> QMatrix:
    """Pure record operation: returns a new matrix with the rule applied.

    Minimum rule: both entries become min(q, existing). Forward rule: when j
    is strictly closer to the targets than k the entries take q_j(k)
    (overwriting only the sentinel); reverse-direction values are ignored and
    same-layer pairs fall back to the minimum.
    """
    qmatrix._check(j)
    qmatrix._check(k)
    values = np.array(qmatrix.values)
    _apply_rule(values, j, k, q, rule, layer)
    return QMatrix(values)


def next_layer(qmatrix: QMatrix, targets, visited, r: int, q_path: float) -> frozenset[int]:
    """Unvisited nodes whose lightest recorded path is within the threshold."""
    if r < 1:
        raise ValueError("radius must be at least 1")
    dist = hop_limited_distances(qmatrix, targets, r)
    visited = set(visited)
    return frozenset(
        j for j in range(1, qmatrix.p + 1)
        if j not in visited and dist[j - 1] <= q_path
    )


def run_pfs(x: DataMatrix, targets, config: PfsConfig) -> LocalGraphEstimate:
    """Execute the layered algorithm and return the local graph estimate.

    Nodes within a layer are processed in ascending index with seeds derived
    per node, so the per-node estimations are order-independent and could run
    concurrently; recording is a sequential reduction in node order.
    """
    targets = frozenset(int(t) for t in targets)
    if not targets:
        raise ValueError("target set must be nonempty")
    for t in targets:
        x.check_node(t)

    values = np.ones((x.p, x.p))
    layer: dict[int, int] = {t: 0 for t in targets}
    edge_info: dict[tuple[int, int], EdgeInfo] = {}
    visited = set(targets)
    current = set(targets)

    for r in range(1, config.r_max + 1):
        for j in sorted(current):
            estimator = replace(config.estimator, seed=node_seed(config.estimator.seed, j))
            try:
                qv = estimate_neighbor_qvalues(x, j, estimator)
            except PfsGraphError as exc:
                raise EstimationError(j, exc) from exc
            for k in qv.feature_nodes():
                q = qv.q_of(k)
                if q <= config.threshold_for(j, k, r):
                    changed = _apply_rule(values, j, k, q, config.rule, layer)
                    if values[j - 1, k - 1] >= NO_EDGE:
                        continue  # nothing recorded (q at the sentinel or rule ignored it)
                    edge = normalize_edge(j, k)
                    if edge not in edge_info:
                        edge_info[edge] = EdgeInfo(efp=qv.efp_of(k), radius=r)
                    elif changed:
                        edge_info[edge] = replace(edge_info[edge], efp=qv.efp_of(k))
        qmat = QMatrix(np.array(values))
        fresh = next_layer(qmat, targets, visited, r, config.q_path)
        for j in sorted(fresh):
            layer[j] = r
        visited |= fresh
        current = set(fresh)
        if not current:
            break

    return LocalGraphEstimate(
        targets=targets,
        radius=config.r_max,
        qmatrix=QMatrix(values),
        layer=layer,
        edge_info=edge_info,
        names=x.names,
        groups={j: config.groups[j] for j in config.groups},
        config_hash=config_hash(config),
    )
