"""Command line surface: simulate, pfs, prune, study, ingest, export, replay.

Exit codes: 0 success, 1 usage error, 2 data/processing error. ``--seed``
overrides the config seed wherever one applies. Every run that writes files
also writes a manifest.json sufficient for a bit-identical replay.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import build_ingest_spec, build_pfs_config, load_config, target_names
from .data import DataMatrix
from .errors import PfsGraphError
from .evaluate import StudyConfig, default_pfs_config, run_study
from .export import export_graph, load_estimate
from .graphs import prune
from .ingest import IngestSpec, ingest, read_dataset
from .manifest import (
    RunManifest,
    file_sha256,
    load_manifest,
    write_bytes_atomic,
    write_manifest,
    write_text_atomic,
)
from .pfs import PfsConfig, run_pfs
from .simulate import DESIGNS, generate_instance


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the CLI contract wants 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="pfsgraph", description="Local graph estimation via pathwise feature selection")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", help="write a simulated instance to disk")
    p.add_argument("--design", required=True, choices=sorted(DESIGNS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--snr", type=float, default=4.0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("pfs", help="run pathwise feature selection on a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the estimator seed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("prune", help="re-threshold an existing estimate")
    p.add_argument("--estimate", required=True)
    p.add_argument("--q-path", type=float, required=True, dest="q_path")
    p.add_argument("--out", required=True)

    p = sub.add_parser("study", help="run a simulation study and write report tables")
    p.add_argument("--design", required=True, choices=sorted(DESIGNS))
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--r-max", type=int, default=None, dest="r_max")
    p.add_argument("--baseline", choices=["or", "and"], default=None)
    p.add_argument("--config", default=None, help="optional TOML overriding [pfs]/[estimator]")
    p.add_argument("--out", required=True)

    p = sub.add_parser("ingest", help="clean a raw CSV into the dataset format")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export", help="render an estimate as DOT or JSON")
    p.add_argument("--estimate", required=True)
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    return parser


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if ns.command is None:
        print("usage error: a subcommand is required", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[ns.command](ns)
    except (PfsGraphError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


def _outdir(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, command: str, args: dict, seed, inputs: list, files: dict[str, str | bytes]) -> int:
    outputs = {}
    for name, payload in files.items():
        target = out / name
        if isinstance(payload, bytes):
            write_bytes_atomic(target, payload)
        else:
            write_text_atomic(target, payload)
        outputs[name] = file_sha256(target)
    manifest = RunManifest(command=command, args=args, seed=seed,
                           inputs={str(k): file_sha256(k) for k in inputs}, outputs=outputs)
    write_manifest(manifest, out / "manifest.json")
    return 0


# each executor takes a plain args dict so `replay` can re-invoke it verbatim


def _exec_simulate(args: dict, out: Path) -> int:
    inst = generate_instance(args["design"], n=args.get("n"), p=args.get("p"),
                             seed=args["seed"], snr=args.get("snr", 4.0))
    doc = {
        "format_version": 1,
        "design": args["design"],
        "seed": args["seed"],
        "n": inst.n,
        "p": inst.samples.p,
        "snr": args.get("snr", 4.0),
        "response_kind": inst.response_kind,
        "block_sizes": list(inst.spec.block_sizes),
        "truth_edges": sorted(map(list, inst.truth.edges)),
    }
    import io

    buf = io.BytesIO()
    np.save(buf, inst.theta)
    csv_buf = io.StringIO()
    _write_dataset_to(inst.samples, csv_buf)
    return _finish(out, "simulate", args, args["seed"], [], {
        "data.csv": csv_buf.getvalue(),
        "instance.json": json.dumps(doc, indent=2, sort_keys=True) + "\n",
        "theta.npy": buf.getvalue(),
    })


def _write_dataset_to(matrix: DataMatrix, handle) -> None:
    from .ingest import DATASET_HEADER

    handle.write(DATASET_HEADER + "\n")
    handle.write("# kinds: " + ",".join(matrix.kinds) + "\n")
    handle.write(",".join(matrix.names) + "\n")
    for row in matrix.values:
        handle.write(",".join(repr(float(v)) for v in row) + "\n")


def _exec_pfs(args: dict, out: Path) -> int:
    data = read_dataset(args["data"])
    config = PfsConfig.from_dict(args["pfs"])
    targets = [int(t) for t in args["targets"]]
    estimate = run_pfs(data, targets, config)
    layers = {str(n): l for n, l in sorted(estimate.layer.items())}
    summary = {
        "targets": sorted(estimate.targets),
        "nodes": len(estimate.layer),
        "edges": len(estimate.recorded_edges()),
        "layers": layers,
    }
    return _finish(out, "pfs", args, config.estimator.seed, [args["data"]], {
        "estimate.json": export_graph(estimate, "json"),
        "summary.json": json.dumps(summary, indent=2, sort_keys=True) + "\n",
    })


def _exec_prune(args: dict, out: Path) -> int:
    estimate = load_estimate(args["estimate"])
    pruned = prune(estimate, args["q_path"])
    return _finish(out, "prune", args, None, [args["estimate"]], {
        "estimate.json": export_graph(pruned, "json"),
    })


def _exec_study(args: dict, out: Path) -> int:
    config = StudyConfig.from_dict(args["study"])
    report = run_study(config)
    return _finish(out, "study", args, config.seed, [], {
        "report.csv": report.to_csv(),
        "report.json": json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
    })


def _exec_ingest(args: dict, out: Path) -> int:
    spec = IngestSpec.from_dict(args["ingest"])
    matrix, summary = ingest(spec)
    import io

    buf = io.StringIO()
    _write_dataset_to(matrix, buf)
    return _finish(out, "ingest", args, None, [spec.source], {
        "clean.csv": buf.getvalue(),
        "summary.json": json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n",
    })


def _exec_export(args: dict, out: Path) -> int:
    estimate = load_estimate(args["estimate"])
    rendered = export_graph(estimate, args["format"])
    name = f"estimate.{args['format']}"
    return _finish(out, "export", args, None, [args["estimate"]], {name: rendered})


_EXECUTORS = {
    "simulate": _exec_simulate,
    "pfs": _exec_pfs,
    "prune": _exec_prune,
    "study": _exec_study,
    "ingest": _exec_ingest,
    "export": _exec_export,
}


def _cmd_simulate(ns) -> int:
    args = {"design": ns.design, "seed": ns.seed, "n": ns.n, "p": ns.p, "snr": ns.snr}
    return _exec_simulate(args, _outdir(ns.out))


def _cmd_pfs(ns) -> int:
    doc = load_config(ns.config)
    data = read_dataset(ns.data)
    config = build_pfs_config(doc, data, seed_override=ns.seed)
    targets = [data.node_of(name) for name in target_names(doc)]
    args = {"data": ns.data, "targets": targets, "pfs": config.to_dict()}
    return _exec_pfs(args, _outdir(ns.out))


def _cmd_prune(ns) -> int:
    args = {"estimate": ns.estimate, "q_path": ns.q_path}
    return _exec_prune(args, _outdir(ns.out))


def _cmd_study(ns) -> int:
    config = default_pfs_config(ns.design, r_max=ns.r_max, seed=ns.seed)
    if ns.config is not None:
        doc = load_config(ns.config)
        section = dict(doc.get("pfs", {}))
        if "node_overrides" in section or "groups" in section or "targets" in section:
            raise ValueError("study configs take threshold/estimator keys only "
                             "(node names are not resolvable for simulated data)")
        merged = config.to_dict()
        if "estimator" in doc:
            merged["estimator"].update(doc["estimator"])
            merged["estimator"]["seed"] = ns.seed
        if "r_max" in section and ns.r_max is None:
            merged["r_max"] = section["r_max"]
        if "q_default" in section:
            q = section["q_default"]
            merged["q_r_default"] = list(q) if isinstance(q, list) else [float(q)] * merged["r_max"]
        for key in ("q_path", "rule", "intermodal_q", "intramodal_q"):
            if key in section:
                merged[key] = section[key]
        config = PfsConfig.from_dict(merged)
    study = StudyConfig(
        design=ns.design, trials=ns.trials, n=ns.n, p=ns.p, pfs=config,
        baseline_enabled=ns.baseline is not None,
        baseline_combine=(ns.baseline or "or").upper(),
        seed=ns.seed,
    )
    args = {"study": study.to_dict()}
    return _exec_study(args, _outdir(ns.out))


def _cmd_ingest(ns) -> int:
    doc = load_config(ns.config)
    spec = build_ingest_spec(doc, ns.data)
    args = {"ingest": spec.to_dict()}
    return _exec_ingest(args, _outdir(ns.out))


def _cmd_export(ns) -> int:
    estimate = load_estimate(ns.estimate)
    rendered = export_graph(estimate, ns.format)
    if ns.out is None:
        sys.stdout.write(rendered)
        return 0
    args = {"estimate": ns.estimate, "format": ns.format}
    return _exec_export(args, _outdir(ns.out))


def _cmd_replay(ns) -> int:
    manifest = load_manifest(ns.manifest)
    for path, digest in manifest.inputs.items():
        if digest and Path(path).exists() and file_sha256(path) != digest:
            raise ValueError(f"input {path} changed since the recorded run")
    executor = _EXECUTORS.get(manifest.command)
    if executor is None:
        raise ValueError(f"manifest command {manifest.command!r} cannot be replayed")
    return executor(manifest.args, _outdir(ns.out))


_COMMANDS = {
    "simulate": _cmd_simulate,
    "pfs": _cmd_pfs,
    "prune": _cmd_prune,
    "study": _cmd_study,
    "ingest": _cmd_ingest,
    "export": _cmd_export,
    "replay": _cmd_replay,
}


if __name__ == "__main__":
    main()
