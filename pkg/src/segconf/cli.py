"""Command-line front end.

Subcommands: ``synth``, ``confmap``, ``eval``, ``report``, ``catalog-dump``.
Every command is a pure function of its config and input files; reruns are
byte-identical, regardless of ``--workers``. Exit codes: 0 success,
1 validation error, 2 I/O or protocol error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .augment import build_catalog, catalog_checksum, catalog_to_json
from .confmaps import Method, mc_dropout_map, pre_threshold_map, tta_map
from .datasets import DatasetManifest, load_manifest, load_sample, write_dataset
from .errors import CapabilityError, SegconfError, ValidationError
from .evaluate import ThresholdGrid, build_report, write_report_files
from .plots import render_calibration, render_gains, render_roc
from .raster_io import read_pfm, write_pfm
from .scorers import ExternalScorer, Scorer, SyntheticScorer
from .synthetic import SyntheticSpec, generate_synthetic_dataset


@dataclass(frozen=True)
class RunConfig:
    task: str
    method: str
    scorer: str
    seed: int
    trials: int
    tau: float
    grid: tuple[float, ...]
    auc_pooling: str
    input_path: str
    output_path: str


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); bad flags are validation
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="segconf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--task", choices=["single", "multi"], default="multi")
    p.add_argument("--blob-min", type=int, default=1)
    p.add_argument("--blob-max", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.05)

    p = sub.add_parser("confmap", help="build confidence maps")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--scorer", default="synthetic",
                   help="'synthetic' or 'external:<executable>'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=286)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("eval", help="evaluate confidence maps")
    p.add_argument("--manifest", required=True)
    p.add_argument("--maps", required=True, help="directory of <id>.pfm maps")
    p.add_argument("--out", required=True)
    p.add_argument("--method", default=None,
                   help="method tag; defaults to the maps dir run.json")
    p.add_argument("--grid", default=None,
                   help="comma-separated thresholds, default 0.1..0.9")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--auc-pooling", choices=["pooled", "per_image_mean"],
                   default="pooled")
    p.add_argument("--min-samples", type=int, default=3)

    p = sub.add_parser("report", help="render SVG plots from report.json files")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("catalog-dump", help="dump the augmentation catalog as JSON")
    p.add_argument("--out", default=None)
    return parser


def _make_scorer(descriptor: str) -> Scorer:
    if descriptor == "synthetic":
        return SyntheticScorer()
    if descriptor.startswith("external:"):
        path = descriptor.split(":", 1)[1]
        if not path:
            raise ValidationError("external scorer needs a path: external:<executable>")
        return ExternalScorer(path)
    raise ValidationError(f"unknown scorer {descriptor!r}")


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        seed=args.seed, count=args.count, height=args.size, width=args.size,
        blob_count_range=(args.blob_min, args.blob_max), noise_level=args.noise,
    )
    samples = generate_synthetic_dataset(spec)
    manifest = write_dataset(samples, args.out, args.task)
    print(f"wrote {len(samples)} samples to {manifest}")
    return 0


def _compute_map(method: str, scorer: Scorer, sample, args, catalog):
    if method == Method.PRE_THRESHOLD.value:
        return pre_threshold_map(scorer, sample)
    if method == Method.MC_DROPOUT.value:
        return mc_dropout_map(scorer, sample, trials=args.trials, tau=args.tau)
    return tta_map(scorer, sample, catalog)


def cmd_confmap(args) -> int:
    manifest = load_manifest(args.manifest)
    scorer = _make_scorer(args.scorer)
    catalog = build_catalog() if args.method == Method.TTA.value else None
    out_dir = Path(args.out) / args.method
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = max(1, args.workers)
    if not scorer.capabilities.parallel_safe:
        workers = 1

    def run_one(entry):
        sample = load_sample(manifest, entry)
        conf = _compute_map(args.method, scorer, sample, args, catalog)
        write_pfm(conf.to_scoremap(), out_dir / f"{sample.id}.pfm")
        return sample.id

    if workers == 1:
        for entry in manifest.samples:
            run_one(entry)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, manifest.samples))

    # no "out" (implied by the file's own location) and no worker count:
    # runs into different directories stay byte-comparable
    run_record = {
        "command": "confmap",
        "task": manifest.task,
        "method": args.method,
        "scorer": args.scorer,
        "seed": args.seed,
        "trials": args.trials,
        "tau": args.tau,
        "manifest": str(args.manifest),
        "catalog_size": len(catalog) if catalog is not None else None,
        "catalog_checksum": catalog_checksum(catalog) if catalog is not None else None,
    }
    (out_dir / "run.json").write_text(json.dumps(run_record, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(manifest.samples)} {args.method} maps to {out_dir}")
    return 0


def _load_maps(manifest: DatasetManifest, maps_dir: Path):
    maps = []
    for entry in manifest.samples:
        path = maps_dir / f"{entry.id}.pfm"
        if not path.exists():
            raise FileNotFoundError(f"missing confidence map for sample {entry.id!r}: {path}")
        maps.append(read_pfm(path))
    return maps


def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    maps_dir = Path(args.maps)
    method = args.method
    run_path = maps_dir / "run.json"
    if method is None:
        if not run_path.exists():
            raise ValidationError("no --method given and no run.json in the maps directory")
        method = json.loads(run_path.read_text())["method"]
    grid = ThresholdGrid() if args.grid is None else ThresholdGrid(
        tuple(float(v) for v in args.grid.split(","))
    )
    maps = _load_maps(manifest, maps_dir)
    truths = [load_sample(manifest, entry).truth for entry in manifest.samples]
    report = build_report(
        method, maps, truths, manifest.ids, grid=grid, default_tau=args.tau,
        auc_pooling=args.auc_pooling, min_samples=args.min_samples,
    )
    write_report_files(report, args.out)
    print(f"auc={report.auc:.6f} iou_a={report.iou_a:.6f} -> {args.out}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        reports.append(json.loads(Path(path).read_text()))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "calibration.svg").write_text(render_calibration(reports))
    (out / "roc.svg").write_text(render_roc(reports))
    (out / "gains.svg").write_text(render_gains(reports))
    print(f"wrote calibration.svg, roc.svg, gains.svg to {out}")
    return 0


def cmd_catalog_dump(args) -> int:
    catalog = build_catalog()
    payload = {
        "size": len(catalog),
        "checksum": catalog_checksum(catalog),
        "entries": catalog_to_json(catalog),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "confmap": cmd_confmap,
    "eval": cmd_eval,
    "report": cmd_report,
    "catalog-dump": cmd_catalog_dump,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ValidationError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SegconfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
