"""On-disk datasets: per-channel PFM images, PGM truths, and manifest.json.

Layout under a dataset root::

    manifest.json
    <id>/post.r.pfm  post.g.pfm  post.b.pfm
    <id>/pre.r.pfm   pre.g.pfm   pre.b.pfm      (multi-image task only)
    <id>/truth.pgm

All manifest paths are relative to the manifest's directory. The pre-event
image is present exactly when the manifest declares the multi-image task.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import ValidationError
from .grids import Image, Sample, ScoreMap
from .raster_io import read_pfm, read_pgm, write_pfm, write_pgm

_CHANNELS = ("r", "g", "b")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    post: dict[str, str]
    truth: str
    pre: dict[str, str] | None = None


@dataclass(frozen=True)
class DatasetManifest:
    task: str
    samples: tuple[ManifestEntry, ...]
    root: Path

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]


def write_dataset(samples: Sequence[Sample], out_dir, task: str) -> Path:
    """Write samples and manifest.json; returns the manifest path.

    ``task="single"`` drops pre-event images even if samples carry them.
    """
    if task not in ("single", "multi"):
        raise ValidationError(f"task must be 'single' or 'multi', got {task!r}")
    if not samples:
        raise ValidationError("no samples to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for sample in samples:
        if task == "multi" and sample.pre_image is None:
            raise ValidationError(f"sample {sample.id!r} lacks a pre-event image")
        sample_dir = out / sample.id
        sample_dir.mkdir(exist_ok=True)

        def write_planes(img: Image, prefix: str) -> dict[str, str]:
            paths = {}
            for idx, name in enumerate(_CHANNELS):
                rel = f"{sample.id}/{prefix}.{name}.pfm"
                write_pfm(ScoreMap(img.plane(idx)), out / rel)
                paths[name] = rel
            return paths

        truth_rel = f"{sample.id}/truth.pgm"
        write_pgm(sample.truth, out / truth_rel)
        entries.append({
            "id": sample.id,
            "post": write_planes(sample.post_image, "post"),
            "pre": write_planes(sample.pre_image, "pre") if task == "multi" else None,
            "truth": truth_rel,
        })
    manifest = {"task": task, "samples": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed manifest: {exc}") from exc
    task = raw.get("task")
    if task not in ("single", "multi"):
        raise ValidationError(f"{path}: task must be 'single' or 'multi', got {task!r}")
    samples_raw = raw.get("samples")
    if not isinstance(samples_raw, list) or not samples_raw:
        raise ValidationError(f"{path}: manifest lists no samples")
    root = path.parent
    entries = []
    seen = set()
    for item in samples_raw:
        sid = item.get("id")
        if not sid or sid in seen:
            raise ValidationError(f"{path}: missing or duplicate sample id {sid!r}")
        seen.add(sid)
        post = item.get("post")
        pre = item.get("pre")
        truth = item.get("truth")
        if not isinstance(post, dict) or set(post) != set(_CHANNELS):
            raise ValidationError(f"{path}: sample {sid!r} needs post channels r, g, b")
        if task == "multi":
            if not isinstance(pre, dict) or set(pre) != set(_CHANNELS):
                raise ValidationError(
                    f"{path}: multi-image task but sample {sid!r} has no pre-event image"
                )
        elif pre is not None:
            raise ValidationError(
                f"{path}: single-image task but sample {sid!r} lists a pre-event image"
            )
        if not truth:
            raise ValidationError(f"{path}: sample {sid!r} lacks a truth path")
        for rel in [*post.values(), *((pre or {}).values()), truth]:
            if not (root / rel).exists():
                raise ValidationError(f"{path}: referenced file missing: {rel}")
        entries.append(ManifestEntry(id=sid, post=dict(post), truth=truth,
                                     pre=dict(pre) if pre else None))
    return DatasetManifest(task=task, samples=tuple(entries), root=root)


def load_sample(manifest: DatasetManifest, entry: ManifestEntry) -> Sample:
    def read_image(paths: dict[str, str]) -> Image:
        planes = [read_pfm(manifest.root / paths[name]).data for name in _CHANNELS]
        return Image.from_planes(*planes)

    return Sample(
        id=entry.id,
        post_image=read_image(entry.post),
        pre_image=read_image(entry.pre) if entry.pre is not None else None,
        truth=read_pgm(manifest.root / entry.truth),
    )


def load_samples(manifest: DatasetManifest) -> list[Sample]:
    return [load_sample(manifest, entry) for entry in manifest.samples]
