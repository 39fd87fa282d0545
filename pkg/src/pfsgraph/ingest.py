"""CSV ingestion and cleaning into a DataMatrix, plus the dataset writer.

Cleaning order: rows missing a target are dropped (or rejected), non-target
columns over the missing-fraction limit are dropped, remaining incomplete rows
are dropped so the matrix stays finite, constant columns are dropped, and
near-duplicate columns (absolute correlation above the threshold) keep only
the earliest representative. Every decision lands in the summary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import BINARY, CONTINUOUS, DataMatrix
from .errors import IngestError

DATASET_HEADER = "# format: pfsgraph-dataset/1"


@dataclass(frozen=True)
class IngestSpec:
    """What to read and how aggressively to clean it."""

    source: str
    targets: tuple[str, ...]
    kind_overrides: dict[str, str] = field(default_factory=dict)
    max_missing_fraction: float = 0.0
    row_policy: str = "drop"
    dedup_correlation: float = 0.999
    standardize: bool = False
    one_vs_rest: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "one_vs_rest", tuple(self.one_vs_rest))
        object.__setattr__(self, "kind_overrides", dict(self.kind_overrides))
        if not self.targets:
            raise ValueError("at least one target column is required")
        if not 0.0 < self.dedup_correlation <= 1.0:
            raise ValueError("dedup threshold must lie in (0, 1]")
        if not 0.0 <= self.max_missing_fraction <= 1.0:
            raise ValueError("missing fraction must lie in [0, 1]")
        if self.row_policy not in ("drop", "error"):
            raise ValueError("row policy must be 'drop' or 'error'")
        for name, kind in self.kind_overrides.items():
            if kind not in (CONTINUOUS, BINARY):
                raise ValueError(f"unknown kind override {kind!r} for column {name!r}")

    def to_dict(self) -> dict:
        return {
            "source": str(self.source),
            "targets": list(self.targets),
            "kind_overrides": dict(self.kind_overrides),
            "max_missing_fraction": self.max_missing_fraction,
            "row_policy": self.row_policy,
            "dedup_correlation": self.dedup_correlation,
            "standardize": self.standardize,
            "one_vs_rest": list(self.one_vs_rest),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IngestSpec":
        return cls(
            source=d["source"],
            targets=tuple(d["targets"]),
            kind_overrides=dict(d.get("kind_overrides", {})),
            max_missing_fraction=d.get("max_missing_fraction", 0.0),
            row_policy=d.get("row_policy", "drop"),
            dedup_correlation=d.get("dedup_correlation", 0.999),
            standardize=d.get("standardize", False),
            one_vs_rest=tuple(d.get("one_vs_rest", ())),
        )


@dataclass
class IngestSummary:
    """Cleaning report: what was dropped and why."""

    rows_in: int = 0
    rows_out: int = 0
    columns_in: int = 0
    columns_out: int = 0
    dropped_columns: list[tuple[str, str]] = field(default_factory=list)
    dropped_rows: dict[str, int] = field(default_factory=dict)
    encoded_columns: dict[str, list[str]] = field(default_factory=dict)
    target_columns: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
            "columns_in": self.columns_in,
            "columns_out": self.columns_out,
            "dropped_columns": [list(x) for x in self.dropped_columns],
            "dropped_rows": dict(self.dropped_rows),
            "encoded_columns": {k: list(v) for k, v in self.encoded_columns.items()},
            "target_columns": list(self.target_columns),
        }


def _read_csv(path: Path) -> tuple[list[str], list[list[str]], list[str]]:
    """Header, raw string rows, and leading comment lines."""
    comments = []
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = None
        rows = []
        for raw in reader:
            if header is None and raw and raw[0].startswith("#"):
                comments.append(",".join(raw))
                continue
            if header is None:
                header = raw
                continue
            rows.append(raw)
    if not header:
        raise IngestError(f"{path} has no header row")
    if len(set(header)) != len(header):
        raise IngestError(f"{path} has duplicate column names")
    return header, rows, comments


def ingest(spec: IngestSpec) -> tuple[DataMatrix, IngestSummary]:
    """Parse, clean, optionally standardize; return the matrix and summary."""
    path = Path(spec.source)
    header, raw_rows, comments = _read_csv(path)
    summary = IngestSummary(rows_in=len(raw_rows), columns_in=len(header))

    kinds_comment = _kinds_from_comments(comments, header)

    for t in spec.targets:
        if t not in header:
            raise IngestError(f"target column {t!r} not found in {path}")
    for c in spec.one_vs_rest:
        if c not in header:
            raise IngestError(f"one-vs-rest column {c!r} not found in {path}")

    ncols = len(header)
    width_errors = [i for i, r in enumerate(raw_rows) if len(r) != ncols]
    if width_errors:
        raise IngestError("row has wrong number of cells", row=width_errors[0] + 2)

    # parse: numeric columns to float (blank/non-finite -> nan), ovr columns expand
    names: list[str] = []
    columns: list[np.ndarray] = []
    target_names: list[str] = []
    for ci, name in enumerate(header):
        cells = [r[ci].strip() for r in raw_rows]
        if name in spec.one_vs_rest:
            cats = sorted({c for c in cells if c != ""})
            if len(cats) < 2:
                raise IngestError("one-vs-rest column needs at least two categories", column=name)
            for cat in cats:
                new = f"{name}={cat}"
                names.append(new)
                columns.append(np.array([math.nan if c == "" else float(c == cat) for c in cells]))
                summary.encoded_columns.setdefault(name, []).append(new)
                if name in spec.targets:
                    target_names.append(new)
        else:
            names.append(name)
            columns.append(_parse_numeric(cells, name))
            if name in spec.targets:
                target_names.append(name)
    summary.target_columns = list(target_names)

    values = np.column_stack(columns) if columns else np.empty((len(raw_rows), 0))
    names_arr = list(names)
    target_idx = [names_arr.index(t) for t in target_names]

    # rows missing a target
    bad_target = np.isnan(values[:, target_idx]).any(axis=1) if target_idx else np.zeros(len(values), bool)
    if bad_target.any():
        if spec.row_policy == "error":
            raise IngestError("row is missing a target value", row=int(np.nonzero(bad_target)[0][0]) + 2)
        summary.dropped_rows["missing_target"] = int(bad_target.sum())
        values = values[~bad_target]
    if values.shape[0] == 0:
        raise IngestError("no rows remain after target filtering")

    # column missing-fraction filter (targets exempt)
    keep = np.ones(len(names_arr), dtype=bool)
    miss_frac = np.isnan(values).mean(axis=0)
    for i, name in enumerate(names_arr):
        if i not in target_idx and miss_frac[i] > spec.max_missing_fraction:
            keep[i] = False
            summary.dropped_columns.append((name, f"missing fraction {miss_frac[i]:.3f} > {spec.max_missing_fraction}"))
    values, names_arr = values[:, keep], [n for n, k in zip(names_arr, keep) if k]

    # drop incomplete rows so the matrix is finite
    bad_rows = np.isnan(values).any(axis=1)
    if bad_rows.any():
        summary.dropped_rows["incomplete"] = int(bad_rows.sum())
        values = values[~bad_rows]
    if values.shape[0] == 0:
        raise IngestError("no complete rows remain after cleaning")

    # constant columns can never be selected and break standardization
    keep = np.ones(len(names_arr), dtype=bool)
    for i, name in enumerate(names_arr):
        if np.ptp(values[:, i]) == 0:
            if name in target_names:
                raise IngestError("target column is constant after cleaning", column=name)
            keep[i] = False
            summary.dropped_columns.append((name, "constant"))
    values, names_arr = values[:, keep], [n for n, k in zip(names_arr, keep) if k]

    values, names_arr = _dedup(values, names_arr, set(target_names), spec.dedup_correlation, summary)

    for t in target_names:
        if t not in names_arr:
            raise IngestError("target column was dropped during cleaning", column=t)

    kinds = _resolve_kinds(values, names_arr, spec.kind_overrides, kinds_comment)

    center = scale = None
    if spec.standardize:
        center = np.zeros(values.shape[1])
        scale = np.ones(values.shape[1])
        values = np.array(values)
        for i, kind in enumerate(kinds):
            if kind == CONTINUOUS:
                center[i] = values[:, i].mean()
                scale[i] = values[:, i].std()
                if scale[i] < 1e-12:
                    scale[i] = 1.0
                values[:, i] = (values[:, i] - center[i]) / scale[i]

    summary.rows_out, summary.columns_out = values.shape
    matrix = DataMatrix(values=values, names=tuple(names_arr), kinds=tuple(kinds),
                        center=center, scale=scale)
    return matrix, summary


def _parse_numeric(cells: list[str], name: str) -> np.ndarray:
    out = np.empty(len(cells))
    for i, cell in enumerate(cells):
        if cell == "":
            out[i] = math.nan
            continue
        try:
            v = float(cell)
        except ValueError:
            raise IngestError(f"cannot parse cell value {cell!r}", row=i + 2, column=name) from None
        out[i] = v if math.isfinite(v) else math.nan
    return out


def _dedup(values, names, target_names, threshold, summary):
    """Among pairs with |corr| > threshold keep the earlier column.

    Targets are never dropped; when the later column of an over-threshold pair
    is a target, the earlier non-target is dropped instead.
    """
    p = values.shape[1]
    if p < 2:
        return values, names
    corr = np.corrcoef(values, rowvar=False)
    alive = np.ones(p, dtype=bool)
    for i in range(p):
        if not alive[i]:
            continue
        for j in range(i + 1, p):
            if not alive[j] or abs(corr[i, j]) <= threshold:
                continue
            if names[j] in target_names:
                if names[i] in target_names:
                    continue  # never drop targets
                alive[i] = False
                summary.dropped_columns.append((names[i], f"|corr|>{threshold} with target {names[j]}"))
                break
            alive[j] = False
            summary.dropped_columns.append((names[j], f"|corr|>{threshold} with {names[i]}"))
    return values[:, alive], [n for n, a in zip(names, alive) if a]


def _resolve_kinds(values, names, overrides, kinds_comment):
    kinds = []
    for i, name in enumerate(names):
        two_valued = np.unique(values[:, i]).size == 2
        kind = overrides.get(name) or kinds_comment.get(name) or (BINARY if two_valued else CONTINUOUS)
        if kind == BINARY and not two_valued:
            raise IngestError("column marked binary does not take exactly two values", column=name)
        kinds.append(kind)
    return kinds


def _kinds_from_comments(comments: list[str], header: list[str]) -> dict[str, str]:
    for line in comments:
        if line.startswith("# kinds:"):
            listed = [k.strip() for k in line[len("# kinds:"):].split(",")]
            if len(listed) == len(header):
                return dict(zip(header, listed))
    return {}


def read_dataset(path) -> DataMatrix:
    """Strict dataset reader: complete numeric CSV, no cleaning applied."""
    header, raw_rows, comments = _read_csv(Path(path))
    kinds_comment = _kinds_from_comments(comments, header)
    if not raw_rows:
        raise IngestError(f"{path} has no data rows")
    columns = []
    for ci, name in enumerate(header):
        col = _parse_numeric([r[ci].strip() if ci < len(r) else "" for r in raw_rows], name)
        bad = np.nonzero(np.isnan(col))[0]
        if bad.size:
            raise IngestError("missing value in dataset", row=int(bad[0]) + 2, column=name)
        columns.append(col)
    values = np.column_stack(columns)
    kinds = _resolve_kinds(values, header, {}, kinds_comment)
    return DataMatrix(values=values, names=tuple(header), kinds=tuple(kinds))


def write_dataset(matrix: DataMatrix, path) -> None:
    """Dataset CSV with format and kinds comments; floats round-trip exactly."""
    path = Path(path)
    lines = [DATASET_HEADER, "# kinds: " + ",".join(matrix.kinds), ",".join(matrix.names)]
    for row in matrix.values:
        lines.append(",".join(repr(float(v)) for v in row))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)
