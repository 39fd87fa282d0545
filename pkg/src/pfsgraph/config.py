"""TOML configuration: sections [pfs], [estimator], [ingest], [study].

Unknown sections or keys are hard errors; node references inside [pfs] use
column names and are resolved against the dataset at run time.
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .data import DataMatrix
from .ingest import IngestSpec
from .pfs import NodeThresholds, PfsConfig
from .qvalues import EstimatorConfig

_PFS_KEYS = {"targets", "r_max", "q_default", "q_path", "rule",
             "intermodal_q", "intramodal_q", "node_overrides", "groups"}
_STUDY_KEYS = {"design", "trials", "n", "p", "seed", "baseline", "baseline_combine",
               "r_max", "audit_threshold"}
_INGEST_KEYS = {"targets", "kind_overrides", "max_missing_fraction", "row_policy",
                "dedup_correlation", "standardize", "one_vs_rest"}
_SECTIONS = {"pfs", "estimator", "ingest", "study"}


def load_config(path) -> dict:
    """Parse and key-validate a TOML config file."""
    with open(path, "rb") as handle:
        doc = tomllib.load(handle)
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    _check_keys(doc.get("pfs", {}), _PFS_KEYS, "pfs")
    _check_keys(doc.get("study", {}), _STUDY_KEYS, "study")
    _check_keys(doc.get("ingest", {}), _INGEST_KEYS, "ingest")
    if "estimator" in doc:
        EstimatorConfig.from_dict(doc["estimator"])  # validates keys and values
    return doc


def _check_keys(section: dict, allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")


def target_names(doc: dict) -> list[str]:
    targets = doc.get("pfs", {}).get("targets")
    if not targets:
        raise ValueError("config must list target columns under [pfs] targets")
    return [str(t) for t in targets]


def build_pfs_config(doc: dict, data: DataMatrix, seed_override: int | None = None) -> PfsConfig:
    """Resolve the [pfs]+[estimator] sections against a dataset's columns."""
    pfs = dict(doc.get("pfs", {}))
    pfs.pop("targets", None)

    est_kw = dict(doc.get("estimator", {}))
    if seed_override is not None:
        est_kw["seed"] = seed_override
    estimator = EstimatorConfig.from_dict(est_kw)

    overrides = {}
    for name, spec in dict(pfs.pop("node_overrides", {})).items():
        node = data.node_of(name)
        if isinstance(spec, dict):
            unknown = set(spec) - {"default", "intermodal", "intramodal"}
            if unknown:
                raise ValueError(f"unknown node override keys for {name!r}: {sorted(unknown)}")
            overrides[node] = NodeThresholds(**spec)
        else:
            overrides[node] = NodeThresholds(default=float(spec))
    groups = {data.node_of(name): str(label) for name, label in dict(pfs.pop("groups", {})).items()}

    q_default = pfs.pop("q_default", None)
    kwargs = {
        "r_max": pfs.pop("r_max", 1),
        "q_path": pfs.pop("q_path", 0.2),
        "rule": pfs.pop("rule", "minimum"),
        "intermodal_q": pfs.pop("intermodal_q", None),
        "intramodal_q": pfs.pop("intramodal_q", None),
        "estimator": estimator,
        "node_overrides": overrides,
        "groups": groups,
    }
    if q_default is not None:
        kwargs["q_r_default"] = tuple(q_default) if isinstance(q_default, (list, tuple)) else (float(q_default),)
    return PfsConfig(**kwargs)


def build_ingest_spec(doc: dict, source) -> IngestSpec:
    section = dict(doc.get("ingest", {}))
    if "targets" not in section:
        raise ValueError("config must list target columns under [ingest] targets")
    return IngestSpec(
        source=str(source),
        targets=tuple(section["targets"]),
        kind_overrides=dict(section.get("kind_overrides", {})),
        max_missing_fraction=section.get("max_missing_fraction", 0.0),
        row_policy=section.get("row_policy", "drop"),
        dedup_correlation=section.get("dedup_correlation", 0.999),
        standardize=section.get("standardize", False),
        one_vs_rest=tuple(section.get("one_vs_rest", ())),
    )


def config_path_or_none(value: str | None) -> Path | None:
    return None if value is None else Path(value)
