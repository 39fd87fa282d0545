"""The sample matrix type shared by the estimator, simulator, and CLI.

Nodes are 1-based everywhere in the public API (node j is column j of the
matrix); the underlying numpy arrays are 0-based as usual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True)
class DataMatrix:
    """n samples by p named variables, continuous or binary-coded.

    ``center``/``scale`` record the standardization applied at ingestion
    (None when the data were not standardized).
    """

    values: np.ndarray
    names: tuple[str, ...]
    kinds: tuple[str, ...]
    center: np.ndarray | None = None
    scale: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        n, p = values.shape
        if n < 10:
            raise ValueError(f"need at least 10 samples, got {n}")
        if p < 2:
            raise ValueError(f"need at least 2 variables, got {p}")
        if len(self.names) != p or len(self.kinds) != p:
            raise ValueError("names/kinds length must match column count")
        if not np.all(np.isfinite(values)):
            raise ValueError("data matrix contains non-finite entries")
        for j, kind in enumerate(self.kinds):
            if kind not in (CONTINUOUS, BINARY):
                raise ValueError(f"unknown column kind {kind!r}")
            if kind == BINARY and np.unique(values[:, j]).size != 2:
                raise ValueError(f"binary column {self.names[j]!r} does not take exactly two values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, node: int) -> np.ndarray:
        """Values of node ``node`` (1-based)."""
        self.check_node(node)
        return self.values[:, node - 1]

    def kind(self, node: int) -> str:
        self.check_node(node)
        return self.kinds[node - 1]

    def node_of(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise ValueError(f"no column named {name!r}") from None

    def check_node(self, node: int) -> None:
        if not 1 <= node <= self.p:
            raise ValueError(f"node index {node} outside [1, {self.p}]")


def standardize_columns(x: np.ndarray) -> np.ndarray:
    """Center and scale columns to mean 0, population variance 1.

    Zero-variance columns are centered only (they end up identically 0 and
    can never be selected downstream), avoiding division by ~0.
    """
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return (x - mean) / std


def is_standardized(x: np.ndarray, tol: float = 1e-6) -> bool:
    """True when every column has mean ~0 and norm^2/n ~ 1 (or is all-zero)."""
    n = x.shape[0]
    mean_ok = np.abs(x.mean(axis=0)) <= tol
    sq = np.einsum("ij,ij->j", x, x) / n
    norm_ok = (np.abs(sq - 1.0) <= tol) | (sq <= tol)
    return bool(np.all(mean_ok & norm_ok))


def simulated_names(p: int) -> tuple[str, ...]:
    return tuple(f"X{j}" for j in range(1, p + 1))


def make_data_matrix(values: np.ndarray, names=None, kinds=None, **kw) -> DataMatrix:
    """Convenience constructor with default names X1..Xp, all continuous."""
    values = np.asarray(values, dtype=np.float64)
    p = values.shape[1]
    if names is None:
        names = simulated_names(p)
    if kinds is None:
        kinds = (CONTINUOUS,) * p
    return DataMatrix(values=values, names=tuple(names), kinds=tuple(kinds), **kw)
