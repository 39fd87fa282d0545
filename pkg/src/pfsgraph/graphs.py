"""Graph types and the combinatorial operations behind local graph estimation.

Covers balls and local edge sets of a ground-truth graph, local error rates,
hop-limited lightest paths over q-value weights, and path-sum pruning of an
estimate. Node indices are 1-based; edges are stored as unordered pairs
normalized to (min, max).

All types are immutable after construction and every operation is a pure
function, so concurrent evaluation needs no synchronization.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Set
from dataclasses import dataclass, field, replace

import numpy as np

Edge = tuple[int, int]

#: QMatrix entry meaning "no edge recorded".
NO_EDGE = 1.0


def normalize_edge(j: int, k: int) -> Edge:
    if j == k:
        raise ValueError(f"self-loop ({j},{k}) is not a valid edge")
    return (j, k) if j < k else (k, j)


def edge_set(edges: Iterable[tuple[int, int]]) -> frozenset[Edge]:
    return frozenset(normalize_edge(j, k) for j, k in edges)


@dataclass(frozen=True)
class TrueGraph:
    """Undirected edge set over p nodes; ground truth in simulations."""

    p: int
    edges: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "edges", edge_set(self.edges))
        for j, k in self.edges:
            if not (1 <= j <= self.p and 1 <= k <= self.p):
                raise ValueError(f"edge ({j},{k}) outside node range [1, {self.p}]")

    def neighbors(self, node: int) -> frozenset[int]:
        return frozenset(k if j == node else j for j, k in self.edges if node in (j, k))

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {j: set() for j in range(1, self.p + 1)}
        for j, k in self.edges:
            adj[j].add(k)
            adj[k].add(j)
        return adj


@dataclass(frozen=True)
class QMatrix:
    """Symmetric p x p matrix of edge q-values in [0, 1].

    Entry 1.0 is the sentinel for "no edge recorded"; an edge exists in the
    estimate iff its entry is strictly below 1.0. The diagonal is exactly 1.0.
    """

    values: np.ndarray

    def __post_init__(self):
        q = np.array(self.values, dtype=np.float64, order="C")
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("q-value matrix must be square")
        if not np.array_equal(q, q.T):
            raise ValueError("q-value matrix must be symmetric")
        if np.any(q < 0.0) or np.any(q > 1.0):
            raise ValueError("q-values must lie in [0, 1]")
        if not np.all(np.diag(q) == NO_EDGE):
            raise ValueError("diagonal entries must be exactly 1.0")
        q.setflags(write=False)
        object.__setattr__(self, "values", q)

    @classmethod
    def empty(cls, p: int) -> "QMatrix":
        return cls(np.ones((p, p)))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def entry(self, j: int, k: int) -> float:
        self._check(j)
        self._check(k)
        return float(self.values[j - 1, k - 1])

    def has_edge(self, j: int, k: int) -> bool:
        return self.entry(j, k) < NO_EDGE

    def recorded_edges(self) -> frozenset[Edge]:
        rows, cols = np.nonzero(self.values < NO_EDGE)
        return frozenset((int(r) + 1, int(c) + 1) for r, c in zip(rows, cols) if r < c)

    def _check(self, node: int) -> None:
        if not 1 <= node <= self.p:
            raise ValueError(f"node index {node} outside [1, {self.p}]")


@dataclass(frozen=True)
class Path:
    """Ordered sequence of distinct nodes; length = node count - 1 >= 1."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(int(j) for j in self.nodes))
        if len(self.nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("path nodes must be distinct")

    def __len__(self) -> int:
        return len(self.nodes) - 1

    def edges(self) -> tuple[Edge, ...]:
        return tuple(normalize_edge(a, b) for a, b in zip(self.nodes, self.nodes[1:]))


@dataclass(frozen=True)
class EdgeInfo:
    """Diagnostics kept alongside a recorded q-value."""

    efp: float | None = None
    radius: int | None = None


@dataclass(frozen=True)
class LocalGraphEstimate:
    """The central result object: q-value matrix plus layer structure.

    ``layer`` maps each admitted node to its distance-from-targets in the
    estimate (0 for targets). ``edge_info`` carries the efp score and the
    radius at which each edge was first recorded. ``names`` label nodes for
    export; ``groups`` optionally tag nodes with a variable-group label.
    """

    targets: frozenset[int]
    radius: int
    qmatrix: QMatrix
    layer: Mapping[int, int]
    edge_info: Mapping[Edge, EdgeInfo] = field(default_factory=dict)
    names: tuple[str, ...] | None = None
    groups: Mapping[int, str] = field(default_factory=dict)
    config_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        object.__setattr__(self, "layer", dict(self.layer))
        object.__setattr__(self, "edge_info", {normalize_edge(*e): v for e, v in self.edge_info.items()})
        object.__setattr__(self, "groups", dict(self.groups))
        if not self.targets:
            raise ValueError("estimate needs at least one target")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        p = self.qmatrix.p
        for t in self.targets:
            if not 1 <= t <= p:
                raise ValueError(f"target {t} outside [1, {p}]")
            if self.layer.get(t, 0) != 0:
                raise ValueError(f"target {t} must sit at layer 0")
        for node, d in self.layer.items():
            if d > self.radius:
                raise ValueError(f"node {node} has layer {d} beyond radius {self.radius}")
            if d < 0 or (d == 0 and node not in self.targets):
                raise ValueError(f"invalid layer {d} for node {node}")

    def recorded_edges(self) -> frozenset[Edge]:
        return self.qmatrix.recorded_edges()

    def edges_within(self, r: int) -> frozenset[Edge]:
        """Edges first recorded at radius <= r (the estimate's radius-r edge set)."""
        return frozenset(
            e for e in self.recorded_edges()
            if (self.edge_info.get(e) is None) or (self.edge_info[e].radius or 0) <= r
        )

    def nodes(self) -> frozenset[int]:
        out = set(self.layer)
        for j, k in self.recorded_edges():
            out.add(j)
            out.add(k)
        return frozenset(out)

    def check_layers(self) -> None:
        """Assert each layer-d node (d >= 1) touches a recorded edge into layer d-1.

        Guaranteed for estimates produced by the layered algorithm; pruning may
        break it in rare geometries, so it is a diagnostic rather than a
        construction-time invariant.
        """
        for node, d in self.layer.items():
            if d == 0:
                continue
            ok = any(
                self.layer.get(other) == d - 1
                for other in self._recorded_neighbors(node)
            )
            if not ok:
                raise AssertionError(f"node {node} at layer {d} has no recorded edge into layer {d - 1}")

    def _recorded_neighbors(self, node: int) -> list[int]:
        row = self.qmatrix.values[node - 1]
        return [int(i) + 1 for i in np.nonzero(row < NO_EDGE)[0]]


def _check_targets(targets: Set[int], p: int) -> frozenset[int]:
    targets = frozenset(targets)
    if not targets:
        raise ValueError("target set must be nonempty")
    for t in targets:
        if not 1 <= t <= p:
            raise ValueError(f"target {t} outside node range [1, {p}]")
    return targets


def ball(graph: TrueGraph, targets: Set[int], r: int) -> frozenset[int]:
    """Nodes within graph distance r of any target (breadth-first layers)."""
    targets = _check_targets(targets, graph.p)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    adj = graph.adjacency()
    reached = set(targets)
    frontier = set(targets)
    for _ in range(r):
        frontier = {k for j in frontier for k in adj[j]} - reached
        if not frontier:
            break
        reached |= frontier
    return frozenset(reached)


def local_edge_set(graph: TrueGraph, targets: Set[int], r: int) -> frozenset[Edge]:
    """Edges with at least one endpoint within distance r-1 of the targets.

    Edges whose endpoints both sit at exact distance r are omitted.
    """
    if r < 1:
        raise ValueError("local edge set is undefined at radius 0")
    inner = ball(graph, targets, r - 1)
    return frozenset(e for e in graph.edges if e[0] in inner or e[1] in inner)


def local_fdp(estimated: Iterable[Edge], truth: Iterable[Edge]) -> float:
    """False discovery proportion |est \\ truth| / max(|est|, 1)."""
    est = edge_set(estimated)
    tru = edge_set(truth)
    return len(est - tru) / max(len(est), 1)


def local_tpr(estimated: Iterable[Edge], truth: Iterable[Edge]) -> float:
    """True positive rate |est & truth| / |truth|; 1.0 on empty truth.

    The empty-truth convention (nothing to find, nothing missed) is never hit
    in the simulation designs but keeps the metric total.
    """
    est = edge_set(estimated)
    tru = edge_set(truth)
    if not tru:
        return 1.0
    return len(est & tru) / len(tru)


def hop_limited_distances(qmatrix: QMatrix, targets: Set[int], r: int) -> np.ndarray:
    """Lightest path weight from the target set to every node, within r hops.

    Bellman-Ford style relaxation over recorded edges (entries < 1.0). With
    nonnegative weights the minimizing walk of <= r hops is a simple path, so
    walks need no distinctness tracking. Index i holds node i+1; targets get 0.
    """
    targets = _check_targets(targets, qmatrix.p)
    if r < 1:
        raise ValueError("hop limit must be at least 1")
    w = np.where(qmatrix.values < NO_EDGE, qmatrix.values, np.inf)
    dist = np.full(qmatrix.p, np.inf)
    dist[[t - 1 for t in targets]] = 0.0
    for _ in range(r):
        relaxed = np.min(dist[:, None] + w, axis=0)
        new = np.minimum(dist, relaxed)
        if np.array_equal(new, dist):
            break
        dist = new
    dist[[t - 1 for t in targets]] = 0.0
    return dist


def lightest_path_distance(qmatrix: QMatrix, targets: Set[int], j: int, r: int) -> float:
    """Minimum q-value sum over paths of length <= r from the targets to j.

    Only recorded edges participate; +inf when j is unreachable in r hops.
    """
    qmatrix._check(j)
    if j in targets:
        raise ValueError(f"node {j} is a target; distance to targets is undefined")
    return float(hop_limited_distances(qmatrix, targets, r)[j - 1])


def path_qsum(qmatrix: QMatrix, path: Path) -> float:
    """Sum of q-values along a path of recorded edges.

    This sum upper-bounds the probability that the path is absent from the
    true graph, which is what makes it usable as a stopping weight.
    """
    total = 0.0
    for j, k in path.edges():
        q = qmatrix.entry(j, k)
        if q >= NO_EDGE:
            raise ValueError(f"path uses unrecorded edge ({j},{k})")
        total += q
    return total


def prune(estimate: LocalGraphEstimate, q_path_threshold: float) -> LocalGraphEstimate:
    """Drop non-target nodes whose lightest path weight exceeds the threshold.

    Distances are measured on the unpruned matrix within the estimate's
    radius; a single pass is idempotent because every prefix of a surviving
    lightest path is itself within the threshold. Targets always survive.
    Surviving nodes keep their layer values.
    """
    if not 0.0 <= q_path_threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    r = max(estimate.radius, 1)
    dist = hop_limited_distances(estimate.qmatrix, estimate.targets, r)
    keep = dist <= q_path_threshold
    for t in estimate.targets:
        keep[t - 1] = True

    q = np.array(estimate.qmatrix.values)
    drop_idx = np.nonzero(~keep)[0]
    q[drop_idx, :] = NO_EDGE
    q[:, drop_idx] = NO_EDGE
    pruned_q = QMatrix(q)

    surviving_edges = pruned_q.recorded_edges()
    return replace(
        estimate,
        qmatrix=pruned_q,
        layer={n: d for n, d in estimate.layer.items() if keep[n - 1]},
        edge_info={e: info for e, info in estimate.edge_info.items() if e in surviving_edges},
    )
