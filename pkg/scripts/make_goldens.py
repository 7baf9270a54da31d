#!/usr/bin/env python3
"""Regenerate the committed golden fixtures under tests/golden/.

Two fixed configurations:

  * dataset A — seed 42, 4 samples, 512x512, multi-image; used for raster
    and scorer goldens and the calibration partition check.
  * dataset B — seed 42, 32 samples, 256x256, multi-image; the end-to-end
    regression: all three methods through the CLI, then evaluation, with
    report file checksums frozen.

Run from the repository root: python scripts/make_goldens.py
Everything is seed-determined; reruns must reproduce the same file.
"""

import hashlib
import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
GOLDEN_DIR = ROOT / "tests" / "golden"

sys.path.insert(0, str(ROOT / "src"))

from segconf.cli import main as cli_main  # noqa: E402
from segconf.datasets import load_manifest, load_samples  # noqa: E402
from segconf.raster_io import write_pfm  # noqa: E402
from segconf.scorers import SyntheticScorer  # noqa: E402
from segconf.synthetic import synthetic_score  # noqa: E402

DATASET_A = ["--seed", "42", "--count", "4", "--size", "512", "--task", "multi"]
DATASET_B = ["--seed", "42", "--count", "32", "--size", "256", "--task", "multi"]
METHODS = ["prethresh", "mcdropout", "tta"]
REPORT_FILES = ["report.json", "calibration.csv", "per_image.csv", "gains.csv"]


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def tree_checksum(root: Path, exclude: tuple[str, ...] = ()) -> str:
    """One digest over all files: sha256 of 'relpath sha256(content)' lines.

    ``exclude`` skips file names that legitimately embed run-local paths
    (run.json records the manifest location it was invoked with).
    """
    lines = []
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name not in exclude:
            lines.append(f"{path.relative_to(root)} {sha256_file(path)}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def run(argv) -> None:
    code = cli_main(argv)
    if code != 0:
        raise SystemExit(f"command failed ({code}): {argv}")


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    golden: dict = {}
    work = Path(tempfile.mkdtemp(prefix="segconf-goldens-"))
    try:
        # dataset A ---------------------------------------------------
        data_a = work / "dataset_a"
        run(["synth", "--out", str(data_a), *DATASET_A])
        golden["dataset_a_tree"] = tree_checksum(data_a)

        samples = load_samples(load_manifest(data_a / "manifest.json"))
        s0 = samples[0]
        golden_pfm = GOLDEN_DIR / "prethresh_s0_seed42.pfm"
        write_pfm(synthetic_score(s0), golden_pfm)
        golden["prethresh_s0_pfm"] = sha256_file(golden_pfm)

        one = synthetic_score(s0, seed=1).data
        two = synthetic_score(s0, seed=2).data
        golden["seed_diff_fraction"] = float(np.mean(one != two))

        # dataset B: end-to-end regression -----------------------------
        data_b = work / "dataset_b"
        run(["synth", "--out", str(data_b), *DATASET_B])
        golden["dataset_b_manifest"] = sha256_file(data_b / "manifest.json")

        maps_root = work / "maps"
        reports: dict = {}
        aucs: dict = {}
        for method in METHODS:
            run(["confmap", "--manifest", str(data_b / "manifest.json"),
                 "--out", str(maps_root), "--method", method, "--workers", "1"])
            eval_dir = work / f"eval-{method}"
            run(["eval", "--manifest", str(data_b / "manifest.json"),
                 "--maps", str(maps_root / method), "--out", str(eval_dir)])
            reports[method] = {name: sha256_file(eval_dir / name) for name in REPORT_FILES}
            payload = json.loads((eval_dir / "report.json").read_text())
            aucs[method] = payload["auc"]
            if method == "tta":
                golden["tta_gain_table"] = payload["gain_bins"]
                golden["tta_iou_a"] = payload["iou_a"]
        golden["e2e_report_files"] = reports
        golden["e2e_auc"] = aucs
        golden["e2e_maps_tree"] = tree_checksum(maps_root, exclude=("run.json",))
    finally:
        shutil.rmtree(work, ignore_errors=True)

    out = GOLDEN_DIR / "golden.json"
    out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
    for key, value in sorted(golden.items()):
        if isinstance(value, (str, float)):
            print(f"  {key}: {value}")


if __name__ == "__main__":
    main()
