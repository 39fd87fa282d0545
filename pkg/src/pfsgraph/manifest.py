"""Run manifests: enough resolved state to replay a run bit-for-bit.

A manifest records the subcommand, its fully resolved arguments (embedded
config dicts, not file paths alone), the seed, input fingerprints, and output
hashes. Outputs themselves carry no timestamps, so a replay from the manifest
reproduces them byte-identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

FORMAT_VERSION = 1
SOFTWARE_VERSION = "0.1.0"


@dataclass
class RunManifest:
    command: str
    args: dict
    seed: int | None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    software_version: str = SOFTWARE_VERSION
    created_utc: str = ""
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.created_utc:
            self.created_utc = datetime.now(timezone.utc).isoformat()


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def write_bytes_atomic(path, blob: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)


def write_manifest(manifest: RunManifest, path) -> None:
    write_text_atomic(path, json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def load_manifest(path) -> RunManifest:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported manifest format version {doc.get('format_version')!r}")
    return RunManifest(
        command=doc["command"],
        args=doc["args"],
        seed=doc.get("seed"),
        inputs=dict(doc.get("inputs", {})),
        outputs=dict(doc.get("outputs", {})),
        software_version=doc.get("software_version", ""),
        created_utc=doc.get("created_utc", ""),
    )
