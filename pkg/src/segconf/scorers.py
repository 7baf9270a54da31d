"""Scorer contract and implementations.

A scorer turns a sample into a score map. ``score`` must be deterministic
(equal inputs give bit-equal outputs); ``sample_stochastic`` must be a pure
function of (sample, seed). Capability flags tell the confidence-map
constructions what a scorer supports; ``parallel_safe=False`` forces callers
to serialize invocations (external processes are serialized by default).
"""

from __future__ import annotations

import json
import shutil
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

from .errors import RasterFormatError, ScorerLaunchError, ScorerProtocolError, ValidationError
from .grids import Sample, ScoreMap
from .raster_io import read_pfm, write_pfm
from .synthetic import deterministic_logit, score_from_logit


@dataclass(frozen=True)
class ScorerCapabilities:
    deterministic: bool
    stochastic: bool
    multi_image: bool
    parallel_safe: bool = True


@runtime_checkable
class Scorer(Protocol):
    capabilities: ScorerCapabilities

    def score(self, sample: Sample) -> ScoreMap: ...

    def sample_stochastic(self, sample: Sample, seed: int) -> ScoreMap: ...


class SyntheticScorer:
    """In-process scorer backed by :func:`segconf.synthetic.synthetic_score`.

    The deterministic logit is memoized for the most recent sample (by
    object identity), so stochastic trials over one sample only pay for the
    seed perturbation. Results are bit-identical with or without the hit.
    """

    capabilities = ScorerCapabilities(deterministic=True, stochastic=True, multi_image=True)

    def __init__(self):
        self._memo: tuple[Sample, object] | None = None

    def _logit(self, sample: Sample):
        memo = self._memo
        if memo is not None and memo[0] is sample:
            return memo[1]
        z = deterministic_logit(sample)
        self._memo = (sample, z)
        return z

    def score(self, sample: Sample) -> ScoreMap:
        return score_from_logit(self._logit(sample), sample.id, None)

    def sample_stochastic(self, sample: Sample, seed: int) -> ScoreMap:
        return score_from_logit(self._logit(sample), sample.id, seed)


_CHANNELS = ("r", "g", "b")


class ExternalScorer:
    """Run an external executable through the job-directory file protocol.

    Per call, a fresh job directory receives ``job.json`` plus one grayscale
    PFM per image channel; the executable is invoked with the directory path
    as its sole argument and must leave ``out/<id>.pfm`` and ``done.json``
    behind. Calls are serialized process-wide.
    """

    def __init__(self, command: str | Path, workdir: str | Path | None = None,
                 timeout: float | None = None):
        self.command = str(command)
        self.workdir = None if workdir is None else str(workdir)
        self.timeout = timeout
        self._lock = threading.Lock()
        self.capabilities = ScorerCapabilities(
            deterministic=True, stochastic=True, multi_image=True, parallel_safe=False
        )

    def score(self, sample: Sample) -> ScoreMap:
        return self._run(sample, seed=None)

    def sample_stochastic(self, sample: Sample, seed: int) -> ScoreMap:
        return self._run(sample, seed=seed)

    def _run(self, sample: Sample, seed: int | None) -> ScoreMap:
        with self._lock:
            job_dir = Path(tempfile.mkdtemp(prefix="segconf-job-", dir=self.workdir))
            try:
                self._write_job(job_dir, sample, seed)
                self._invoke(job_dir)
                return self._read_result(job_dir, sample)
            finally:
                shutil.rmtree(job_dir, ignore_errors=True)

    def _write_job(self, job_dir: Path, sample: Sample, seed: int | None) -> None:
        if sample.post_image.channels != 3:
            raise ValidationError(
                f"external scoring needs 3-channel images, sample {sample.id!r} "
                f"has {sample.post_image.channels}"
            )

        def write_planes(img, prefix: str) -> dict:
            paths = {}
            for idx, name in enumerate(_CHANNELS):
                rel = f"{prefix}.{name}.pfm"
                write_pfm(ScoreMap(img.plane(idx)), job_dir / rel)
                paths[name] = rel
            return paths

        entry = {
            "id": sample.id,
            "post_pfm": write_planes(sample.post_image, "post"),
            "pre_pfm": None if sample.pre_image is None else write_planes(sample.pre_image, "pre"),
            "seed": seed,
        }
        job = {"task": "multi" if sample.is_multi else "single", "samples": [entry]}
        (job_dir / "job.json").write_text(json.dumps(job, indent=2, sort_keys=True) + "\n")

    def _invoke(self, job_dir: Path) -> None:
        try:
            proc = subprocess.run(
                [self.command, str(job_dir)],
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ScorerLaunchError(f"failed to run scorer {self.command!r}: {exc}") from exc
        done_path = job_dir / "done.json"
        message = None
        if done_path.exists():
            try:
                done = json.loads(done_path.read_text())
            except json.JSONDecodeError as exc:
                raise ScorerProtocolError(f"scorer wrote malformed done.json: {exc}") from exc
            if done.get("status") != "ok":
                message = done.get("message", "no message")
        else:
            message = "done.json missing"
        if proc.returncode != 0 or message is not None:
            detail = message or "no error message"
            tail = proc.stderr.strip().splitlines()[-3:]
            raise ScorerProtocolError(
                f"scorer {self.command!r} failed (exit {proc.returncode}): {detail}"
                + (f"; stderr: {' | '.join(tail)}" if tail else "")
            )

    def _read_result(self, job_dir: Path, sample: Sample) -> ScoreMap:
        out_path = job_dir / "out" / f"{sample.id}.pfm"
        if not out_path.exists():
            raise ScorerProtocolError(f"scorer produced no output for sample {sample.id!r}")
        try:
            result = read_pfm(out_path)
        except RasterFormatError as exc:
            raise ScorerProtocolError(f"bad score map for sample {sample.id!r}: {exc}") from exc
        if (result.height, result.width) != (sample.height, sample.width):
            raise ScorerProtocolError(
                f"dimension mismatch for sample {sample.id!r}: scorer wrote "
                f"{result.height}x{result.width}, expected {sample.height}x{sample.width}"
            )
        return result
