"""Multi-trial simulation studies and empirical checks of the path bound.

A study generates instances, runs the layered estimator (and optionally the
nodewise-lasso baseline) on each, scores per-radius local TPR/FDP against the
true local edge sets, and audits the pathwise false-discovery bound: among
retained paths with q-value sum below t, the fraction absent from the true
graph should stay near or below t.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .data import DataMatrix, is_standardized, standardize_columns
from .errors import GenerationError, PfsGraphError
from . import kernels
from .graphs import (
    Edge,
    LocalGraphEstimate,
    TrueGraph,
    local_edge_set,
    local_fdp,
    local_tpr,
    normalize_edge,
)
from .pfs import PfsConfig, run_pfs
from .simulate import DESIGNS, generate_instance

FORMAT_VERSION = 1

# per-design defaults: (neighborhood thresholds out to radius 4, path threshold, selector)
_DESIGN_PFS = {
    "linear": ((0.2, 0.1, 0.1, 0.1), 0.2, "l1"),
    "nonlinear": ((0.2, 0.05, 0.05, 0.05), 0.2, "tree"),
    "fig1": ((0.4, 0.4, 0.4), 0.4, "l1"),
}


def default_pfs_config(design: str, r_max: int | None = None, seed: int = 0) -> PfsConfig:
    """The study thresholds used for each named design."""
    from .qvalues import EstimatorConfig

    if design not in _DESIGN_PFS:
        raise ValueError(f"unknown design {design!r}")
    thresholds, q_path, selector = _DESIGN_PFS[design]
    if r_max is None:
        r_max = 3 if design == "fig1" else 2
    q = tuple(thresholds[min(r, len(thresholds)) - 1] for r in range(1, r_max + 1))
    return PfsConfig(r_max=r_max, q_r_default=q, q_path=q_path,
                     estimator=EstimatorConfig(selector=selector, seed=seed))


@dataclass(frozen=True)
class StudyConfig:
    design: str = "linear"
    trials: int = 30
    n: int | None = None
    p: int | None = None
    pfs: PfsConfig = field(default_factory=PfsConfig)
    baseline_enabled: bool = False
    baseline_combine: str = "OR"
    seed: int = 0
    audit_threshold: float | None = None  # defaults to the pfs path threshold

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.baseline_combine not in ("OR", "AND"):
            raise ValueError("baseline combine rule must be OR or AND")

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "trials": self.trials,
            "n": self.n,
            "p": self.p,
            "pfs": self.pfs.to_dict(),
            "baseline_enabled": self.baseline_enabled,
            "baseline_combine": self.baseline_combine,
            "seed": self.seed,
            "audit_threshold": self.audit_threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        kw = dict(d)
        kw["pfs"] = PfsConfig.from_dict(kw["pfs"])
        return cls(**kw)


@dataclass(frozen=True)
class TrialMetrics:
    trial: int
    method: str
    radius: int
    tpr: float
    fdp: float


@dataclass(frozen=True)
class PathBoundAudit:
    threshold: float
    path_count: int
    false_fraction: float
    false_count: int = 0


@dataclass(frozen=True)
class RadiusRow:
    radius: int
    method: str
    tpr_mean: float
    tpr_sd: float
    fdp_mean: float
    fdp_sd: float


@dataclass(frozen=True)
class EvalReport:
    """Aggregated study results plus the per-trial records behind them."""

    design: str
    trials: int
    seed: int
    r_max: int
    rows: tuple[RadiusRow, ...]
    trial_records: tuple[TrialMetrics, ...]
    audit: PathBoundAudit
    methods: tuple[str, ...]

    def row(self, radius: int, method: str = "pfs") -> RadiusRow:
        for r in self.rows:
            if r.radius == radius and r.method == method:
                return r
        raise KeyError(f"no row for radius {radius}, method {method!r}")

    def to_csv(self) -> str:
        """Radius-per-row table, method/metric columns, mirrored by the JSON."""
        lines = [f"# format: pfsgraph-report/{FORMAT_VERSION}"]
        cols = ["radius"]
        for m in self.methods:
            key = m.replace("-", "_")
            cols += [f"{key}_tpr_mean", f"{key}_tpr_sd", f"{key}_fdr_mean", f"{key}_fdr_sd"]
        lines.append(",".join(cols))
        for radius in range(1, self.r_max + 1):
            cells = [str(radius)]
            for m in self.methods:
                row = self.row(radius, m)
                cells += [repr(row.tpr_mean), repr(row.tpr_sd), repr(row.fdp_mean), repr(row.fdp_sd)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "design": self.design,
            "trials": self.trials,
            "seed": self.seed,
            "r_max": self.r_max,
            "methods": list(self.methods),
            "rows": [vars(r).copy() for r in self.rows],
            "audit": vars(self.audit).copy(),
            "trial_records": [vars(t).copy() for t in self.trial_records],
        }


def audit_path_bound(estimate: LocalGraphEstimate, truth: TrueGraph, t: float) -> PathBoundAudit:
    """Enumerate maximal recorded paths from the targets with q-sum <= t.

    A path is maximal when no recorded edge extends it to an unvisited node
    without exceeding the threshold or the estimate's radius. Returns the
    count and the fraction containing at least one false edge; a count of zero
    reports fraction 0.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    q = estimate.qmatrix
    adj: dict[int, list[tuple[int, float]]] = {}
    for j, k in sorted(estimate.recorded_edges()):
        w = q.entry(j, k)
        adj.setdefault(j, []).append((k, w))
        adj.setdefault(k, []).append((j, w))
    for nbrs in adj.values():
        nbrs.sort()
    cap = max(estimate.radius, 1)
    truth_edges = truth.edges

    count = 0
    false_count = 0

    def extend(node: int, qsum: float, on_path: set[int], length: int, has_false: bool) -> None:
        nonlocal count, false_count
        extensions = []
        if length < cap:
            extensions = [
                (nbr, w) for nbr, w in adj.get(node, [])
                if nbr not in on_path and qsum + w <= t
            ]
        if not extensions:
            if length >= 1:
                count += 1
                false_count += has_false
            return
        for nbr, w in extensions:
            bad = has_false or (normalize_edge(node, nbr) not in truth_edges)
            on_path.add(nbr)
            extend(nbr, qsum + w, on_path, length + 1, bad)
            on_path.remove(nbr)

    for v0 in sorted(estimate.targets):
        extend(v0, 0.0, {v0}, 0, False)

    fraction = false_count / count if count else 0.0
    return PathBoundAudit(threshold=t, path_count=count, false_fraction=fraction, false_count=false_count)


def nodewise_lasso_baseline(x, lambda_rule: tuple[str, float] = ("scaled", 1.5),
                            combine: str = "OR") -> frozenset[Edge]:
    """Per-node L1 selections at a single penalty, combined OR/AND.

    ``lambda_rule`` is ("scaled", c) for lam = c*sqrt(log p / n) or
    ("fixed", lam). Requires standardized input. The default c keeps pure-noise
    datasets near-empty while dense designs still show the characteristic
    high-TPR/high-FDR profile.
    """
    values = x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=np.float64)
    if not is_standardized(values):
        raise ValueError("baseline expects standardized input")
    if combine not in ("OR", "AND"):
        raise ValueError("combine must be OR or AND")
    kind, c = lambda_rule
    n, p = values.shape
    if kind == "scaled":
        lam = c * float(np.sqrt(np.log(p) / n))
    elif kind == "fixed":
        lam = float(c)
    else:
        raise ValueError(f"unknown lambda rule {kind!r}")

    selects: dict[int, set[int]] = {}
    for j in range(1, p + 1):
        y = values[:, j - 1]
        preds = np.delete(values, j - 1, axis=1)
        coefs, _, _ = kernels.lasso_path(preds, y, np.array([lam]), tol=1e-7)
        chosen = np.nonzero(coefs[0])[0]
        others = [k for k in range(1, p + 1) if k != j]
        selects[j] = {others[i] for i in chosen}

    edges = set()
    for j in range(1, p + 1):
        for k in selects[j]:
            if combine == "OR" or j in selects[k]:
                edges.add(normalize_edge(j, k))
    return frozenset(edges)


def glasso_isolation_lambda(x, j: int) -> float:
    """Critical penalty above which the graphical lasso isolates node j.

    Equals max_{k != j} |Sigma_hat[j, k]| on standardized data; documented as
    an analytic check rather than a solver.
    """
    values = x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=np.float64)
    if not is_standardized(values):
        raise ValueError("isolation condition expects standardized input")
    n, p = values.shape
    if not 1 <= j <= p:
        raise ValueError(f"node index {j} outside [1, {p}]")
    sigma_row = values.T @ values[:, j - 1] / n
    sigma_row[j - 1] = 0.0
    return float(np.max(np.abs(sigma_row)))


def _trial_seeds(seed: int, trials: int) -> list[tuple[int, int]]:
    out = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        inst, est = child.spawn(2)
        out.append((int(inst.generate_state(1)[0]), int(est.generate_state(1)[0])))
    return out


def run_study(config: StudyConfig) -> EvalReport:
    """Run the configured number of trials and aggregate per-radius metrics.

    Deterministic in ``config.seed``: per-trial seeds are spawned up front, so
    trials are independent and could execute concurrently with the reduction
    ordered by trial index.
    """
    r_max = config.pfs.r_max
    audit_t = config.pfs.q_path if config.audit_threshold is None else config.audit_threshold
    methods = ["pfs"] + ([f"nlasso-{config.baseline_combine.lower()}"] if config.baseline_enabled else [])

    records: list[TrialMetrics] = []
    pooled_paths = 0
    pooled_false = 0

    for trial, (inst_seed, est_seed) in enumerate(_trial_seeds(config.seed, config.trials)):
        try:
            inst = generate_instance(config.design, n=config.n, p=config.p, seed=inst_seed)
            pfs_config = replace(config.pfs, estimator=replace(config.pfs.estimator, seed=est_seed))
            estimate = run_pfs(inst.samples, {1}, pfs_config)
        except (PfsGraphError, GenerationError) as exc:
            raise GenerationError(f"trial {trial} failed: {exc}") from exc

        for radius in range(1, r_max + 1):
            records.append(_score(trial, "pfs", radius, estimate.edges_within(radius), inst.truth, {1}))

        audit = audit_path_bound(estimate, inst.truth, audit_t)
        pooled_paths += audit.path_count
        pooled_false += audit.false_count

        if config.baseline_enabled:
            std = DataMatrix(
                values=standardize_columns(inst.samples.values),
                names=inst.samples.names,
                kinds=inst.samples.kinds,
            )
            base_edges = nodewise_lasso_baseline(std, combine=config.baseline_combine)
            base_graph = TrueGraph(p=inst.samples.p, edges=base_edges)
            for radius in range(1, r_max + 1):
                records.append(_score(trial, methods[1], radius, local_edge_set(base_graph, {1}, radius), inst.truth, {1}))

    rows = []
    for method in methods:
        for radius in range(1, r_max + 1):
            tprs = [t.tpr for t in records if t.method == method and t.radius == radius]
            fdps = [t.fdp for t in records if t.method == method and t.radius == radius]
            rows.append(RadiusRow(
                radius=radius, method=method,
                tpr_mean=float(np.mean(tprs)), tpr_sd=_sd(tprs),
                fdp_mean=float(np.mean(fdps)), fdp_sd=_sd(fdps),
            ))

    fraction = pooled_false / pooled_paths if pooled_paths else 0.0
    return EvalReport(
        design=config.design, trials=config.trials, seed=config.seed, r_max=r_max,
        rows=tuple(rows), trial_records=tuple(records),
        audit=PathBoundAudit(threshold=audit_t, path_count=pooled_paths,
                             false_fraction=fraction, false_count=pooled_false),
        methods=tuple(methods),
    )


def _score(trial: int, method: str, radius: int, estimated, truth: TrueGraph, targets) -> TrialMetrics:
    true_local = local_edge_set(truth, targets, radius)
    return TrialMetrics(
        trial=trial, method=method, radius=radius,
        tpr=local_tpr(estimated, true_local),
        fdp=local_fdp(estimated, true_local),
    )


def _sd(xs) -> float:
    return float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0
