"""Neighborhood q-values for one response node against all other variables.

The pipeline is: complementary-halves subsampling produces per-level selection
frequencies (L1 path or boosted-tree importance as the base selector); the
frequencies are converted to expected-false-positive scores via a stability
bound minimized over grid levels and frequency thresholds; a step-up map turns
the scores into q-values in [0, 1], smaller meaning stronger evidence that the
feature is a neighbor of the response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import BINARY, DataMatrix, standardize_columns
from .errors import ConvergenceError, DegenerateResponseError, TooFewSamplesError

DEFAULT_TAU_GRID = tuple(np.round(np.arange(0.55, 0.96, 0.05), 2)) + (1.0,)

#: Quantile cuts for the tree selector, descending = decreasing stringency.
DEFAULT_TREE_THRESHOLDS = tuple(np.round(np.linspace(0.995, 0.75, 15), 4))

_MIN_LEAF = 3
_SUBSAMPLE_FRACTION = 1.0  # within each half-sample; kept for documentation


@dataclass(frozen=True)
class EstimatorConfig:
    """Base-selector configuration for q-value estimation."""

    selector: str = "l1"
    B: int = 100
    grid_size: int = 25
    grid_ratio: float = 100.0
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID
    seed: int = 0
    boost_rounds: int = 100
    max_depth: int = 2
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.selector not in ("l1", "tree"):
            raise ValueError(f"unknown selector {self.selector!r}")
        if self.B < 20:
            raise ValueError("B must be at least 20")
        if self.grid_size < 10:
            raise ValueError("grid_size must be at least 10")
        if self.grid_ratio <= 1:
            raise ValueError("grid_ratio must exceed 1")
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))

    def to_dict(self) -> dict:
        return {
            "selector": self.selector,
            "B": self.B,
            "grid_size": self.grid_size,
            "grid_ratio": self.grid_ratio,
            "tau_grid": list(self.tau_grid),
            "seed": self.seed,
            "boost_rounds": self.boost_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        allowed = {"selector", "B", "grid_size", "grid_ratio", "tau_grid", "seed",
                   "boost_rounds", "max_depth", "learning_rate"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown estimator keys: {sorted(unknown)}")
        kw = dict(d)
        if "tau_grid" in kw:
            kw["tau_grid"] = tuple(kw["tau_grid"])
        return cls(**kw)


@dataclass(frozen=True)
class SelectionProfile:
    """Selection frequencies per (stringency level, candidate feature).

    ``grid`` holds the m levels in decreasing stringency; ``freq[l, k]`` is the
    fraction of the 2B half-sample fits that selected candidate k at level l;
    ``avg_selected[l]`` is the mean selected-set size at level l.
    """

    grid: np.ndarray
    freq: np.ndarray
    avg_selected: np.ndarray
    response: int
    subsample_pairs: int

    def __post_init__(self):
        grid = np.array(self.grid, dtype=np.float64)
        freq = np.array(self.freq, dtype=np.float64)
        avg = np.array(self.avg_selected, dtype=np.float64)
        for arr in (grid, freq, avg):
            arr.setflags(write=False)
        if freq.ndim != 2 or grid.shape != (freq.shape[0],) or avg.shape != grid.shape:
            raise ValueError("profile arrays have inconsistent shapes")
        if np.any(freq < 0) or np.any(freq > 1):
            raise ValueError("selection frequencies must lie in [0, 1]")
        if np.any(avg < 0) or np.any(avg > freq.shape[1]):
            raise ValueError("average model sizes must lie in [0, p-1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "avg_selected", avg)


@dataclass(frozen=True)
class EfpQVector:
    """Expected-false-positive scores and q-values for one response node.

    Entry order follows the candidate features, i.e. nodes 1..p with the
    response removed, ascending.
    """

    response: int
    efp: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        efp = np.array(self.efp, dtype=np.float64)
        q = np.array(self.q, dtype=np.float64)
        efp.setflags(write=False)
        q.setflags(write=False)
        if efp.shape != q.shape or efp.ndim != 1:
            raise ValueError("efp and q must be vectors of equal length")
        if np.any(efp < 0):
            raise ValueError("efp scores must be nonnegative")
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("q-values must lie in [0, 1]")
        object.__setattr__(self, "efp", efp)
        object.__setattr__(self, "q", q)

    def _index(self, node: int) -> int:
        if node == self.response:
            raise ValueError("response node has no q-value against itself")
        return node - 1 if node < self.response else node - 2

    def q_of(self, node: int) -> float:
        return float(self.q[self._index(node)])

    def efp_of(self, node: int) -> float:
        return float(self.efp[self._index(node)])

    def feature_nodes(self) -> tuple[int, ...]:
        p = self.q.shape[0] + 1
        return tuple(k for k in range(1, p + 1) if k != self.response)


def soft_threshold_solve(x_sub: np.ndarray, y: np.ndarray, lam: float,
                         tol: float = 1e-9, max_sweeps: int = 2000) -> np.ndarray:
    """L1-penalized least squares (1/2n)||y - Xb||^2 + lam ||b||_1 by cyclic CD.

    Requires standardized columns and centered y; verifies the KKT subgradient
    conditions of the returned solution to 1e-6.
    """
    x_sub = np.ascontiguousarray(x_sub, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if lam < 0:
        raise ValueError("penalty must be nonnegative")
    _check_standardized(x_sub, y)
    coefs, _, converged = kernels.lasso_path(x_sub, y, np.array([lam]), tol=tol, max_sweeps=max_sweeps)
    beta = coefs[0]
    residual = _kkt_residual(x_sub, y, beta, lam)
    if not converged[0]:
        raise ConvergenceError(f"coordinate descent did not converge in {max_sweeps} sweeps", residual)
    return beta


def _check_standardized(x: np.ndarray, y: np.ndarray) -> None:
    n = x.shape[0]
    mean = x.mean(axis=0)
    sq = np.einsum("ij,ij->j", x, x) / n
    ok = (np.abs(mean) <= 1e-6) & ((np.abs(sq - 1.0) <= 1e-4) | (sq <= 1e-12))
    if not np.all(ok):
        raise ValueError("predictor columns must be standardized (mean 0, variance 1)")
    if abs(float(np.mean(y))) > 1e-6 * max(1.0, float(np.std(y))):
        raise ValueError("response must be centered")


def _kkt_residual(x: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    n = x.shape[0]
    grad = x.T @ (y - x @ beta) / n
    active = beta != 0
    res = 0.0
    if np.any(active):
        res = float(np.max(np.abs(grad[active] - lam * np.sign(beta[active]))))
    if np.any(~active):
        res = max(res, float(np.max(np.abs(grad[~active])) - lam))
    return max(res, 0.0)


def regularization_grid(x: np.ndarray, y: np.ndarray, m: int, ratio: float = 100.0) -> np.ndarray:
    """Geometric penalty sequence from lam_max down to lam_max/ratio, length m.

    lam_max = max_k |x_k' y| / n is the smallest penalty with an all-zero
    solution. m >= 10 is the recommended working size; m >= 2 is accepted.
    """
    if m < 2:
        raise ValueError("grid needs at least 2 levels")
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    n = x.shape[0]
    lam_max = float(np.max(np.abs(x.T @ y)) / n)
    if lam_max <= 1e-12:
        raise DegenerateResponseError("response is constant or orthogonal to every predictor")
    return np.geomspace(lam_max, lam_max / ratio, m)


def _half_splits(n: int, B: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """B complementary pairs of disjoint half-samples of size floor(n/2)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    half = n // 2
    splits = []
    for _ in range(B):
        perm = rng.permutation(n)
        splits.append((np.sort(perm[:half]), np.sort(perm[half:2 * half])))
    return splits


def _prepare_response(x: DataMatrix, response: int) -> np.ndarray:
    """Response column ready for least squares: +-1 coded when binary."""
    col = x.column(response)
    if np.ptp(col) == 0:
        raise DegenerateResponseError(f"response column {x.names[response - 1]!r} is constant")
    if x.kind(response) == BINARY:
        hi = np.max(col)
        return np.where(col == hi, 1.0, -1.0)
    return col.astype(np.float64)


def _candidate_matrix(x: DataMatrix, response: int) -> np.ndarray:
    return np.delete(x.values, response - 1, axis=1)


def selection_profile(x: DataMatrix, response: int, grid: np.ndarray, B: int, seed: int) -> SelectionProfile:
    """L1-path selection frequencies over B complementary half-sample pairs.

    Each half is standardized on its own before the path fit; a feature is
    "selected" at level l when its coefficient at grid[l] is nonzero.
    """
    _check_profile_args(x, response, B)
    grid = np.asarray(grid, dtype=np.float64)
    y_full = _prepare_response(x, response)
    preds = _candidate_matrix(x, response)
    m, d = grid.shape[0], preds.shape[1]

    counts = np.zeros((m, d), dtype=np.int64)
    size_sum = np.zeros(m, dtype=np.int64)
    for first, second in _half_splits(x.n, B, seed):
        for idx in (first, second):
            xh = standardize_columns(preds[idx])
            yh = y_full[idx] - y_full[idx].mean()
            # selection-grade tolerance: only the nonzero pattern feeds the scores
            coefs, _, _ = kernels.lasso_path(xh, yh, grid, tol=1e-5)
            mask = coefs != 0.0
            counts += mask
            size_sum += mask.sum(axis=1)
    fits = 2 * B
    return SelectionProfile(
        grid=grid,
        freq=counts / fits,
        avg_selected=size_sum / fits,
        response=response,
        subsample_pairs=B,
    )


def tree_importance_profile(x: DataMatrix, response: int, thresholds, B: int, seed: int,
                            boost_rounds: int = 100, max_depth: int = 2,
                            learning_rate: float = 0.1) -> SelectionProfile:
    """Boosted-tree importance selection frequencies, same subsampling scheme.

    One ensemble is fit per half-sample; at threshold level l the features
    whose importance share strictly exceeds the l-th quantile of the share
    vector count as selected. Thresholds play the role of the penalty grid.
    """
    _check_profile_args(x, response, B)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    y_full = _prepare_response(x, response)
    preds = _candidate_matrix(x, response)
    m, d = thresholds.shape[0], preds.shape[1]

    counts = np.zeros((m, d), dtype=np.int64)
    size_sum = np.zeros(m, dtype=np.int64)
    for first, second in _half_splits(x.n, B, seed):
        for idx in (first, second):
            xh = standardize_columns(preds[idx])
            imp = kernels.boost_importance(
                xh, y_full[idx],
                n_rounds=boost_rounds, learning_rate=learning_rate,
                max_depth=max_depth, min_leaf=_MIN_LEAF,
            )
            total = imp.sum()
            share = imp / total if total > 0 else imp
            cuts = np.quantile(share, thresholds)
            mask = share[None, :] > cuts[:, None]
            counts += mask
            size_sum += mask.sum(axis=1)
    fits = 2 * B
    return SelectionProfile(
        grid=thresholds,
        freq=counts / fits,
        avg_selected=size_sum / fits,
        response=response,
        subsample_pairs=B,
    )


def _check_profile_args(x: DataMatrix, response: int, B: int) -> None:
    x.check_node(response)
    if B < 20:
        raise ValueError("B must be at least 20")
    if x.n < 20:
        raise TooFewSamplesError(f"need at least 20 samples for half-sampling, got {x.n}")


def efp_scores(profile: SelectionProfile, p: int, tau_grid) -> np.ndarray:
    """Expected-false-positive score per candidate feature; lower is stronger.

    efp_k = min over levels l and thresholds tau with freq[l, k] >= tau of
    avg_selected[l]^2 / ((p-1)(2 tau - 1)), floored at the no-evidence ceiling
    p-1 when nothing qualifies (and capped there, maximal uncertainty).
    """
    taus = np.sort(np.asarray(tau_grid, dtype=np.float64))
    if taus.size == 0:
        raise ValueError("tau grid must be nonempty")
    if np.any(taus <= 0.5) or np.any(taus > 1.0):
        raise ValueError("thresholds must lie in (0.5, 1]")
    freq = profile.freq
    avg = profile.avg_selected

    # best (largest) qualifying tau per entry; 1/(2 tau - 1) is decreasing in tau
    pos = np.searchsorted(taus, freq, side="right") - 1
    qualifies = pos >= 0
    tau_best = np.where(qualifies, taus[np.clip(pos, 0, taus.size - 1)], np.nan)
    with np.errstate(invalid="ignore"):
        per_level = (avg[:, None] ** 2) / ((p - 1) * (2.0 * tau_best - 1.0))
    per_level = np.where(qualifies, per_level, np.inf)
    return np.minimum(per_level.min(axis=0), float(p - 1))


def qvalues_from_efp(efp) -> np.ndarray:
    """Step-up map from efp scores to q-values in original feature order.

    Features are ranked by ascending efp; raw_(i) = efp_(i)/i and the step-up
    q_(i) = min_{j >= i} raw_(j), clipped to [0, 1]. Tied efp values share the
    q-value of the largest rank in the tie block (which the step-up minimum
    already yields).
    """
    efp = np.asarray(efp, dtype=np.float64)
    if np.any(efp < 0):
        raise ValueError("efp scores must be nonnegative")
    d = efp.shape[0]
    order = np.argsort(efp, kind="stable")
    ranks = np.arange(1, d + 1, dtype=np.float64)
    raw = efp[order] / ranks
    stepped = np.minimum.accumulate(raw[::-1])[::-1]
    q = np.empty(d)
    q[order] = np.clip(stepped, 0.0, 1.0)
    return q


def estimate_neighbor_qvalues(x: DataMatrix, response: int, config: EstimatorConfig) -> EfpQVector:
    """q-values of every candidate feature as a neighbor of ``response``.

    Routes continuous responses straight to the configured selector and binary
    responses through +-1 coding, then chains profile -> efp -> q. Pure
    function of (x, response, config): identical inputs give identical output.
    """
    x.check_node(response)
    if config.selector == "l1":
        y = _prepare_response(x, response)
        preds_std = standardize_columns(_candidate_matrix(x, response))
        grid = regularization_grid(preds_std, y - y.mean(), config.grid_size, config.grid_ratio)
        profile = selection_profile(x, response, grid, config.B, config.seed)
    else:
        profile = tree_importance_profile(
            x, response, DEFAULT_TREE_THRESHOLDS, config.B, config.seed,
            boost_rounds=config.boost_rounds, max_depth=config.max_depth,
            learning_rate=config.learning_rate,
        )
    efp = efp_scores(profile, x.p, config.tau_grid)
    return EfpQVector(response=response, efp=efp, q=qvalues_from_efp(efp))
