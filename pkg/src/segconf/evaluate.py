"""Quantitative evaluation of confidence maps.

Pixel-level confusion counts and the derived segmentation metrics,
calibration tables over ten confidence bins, rank-based AUC with average-rank
tie correction, image-specific thresholding (best IoU over a threshold grid,
averaged over images), and IoU-gain-by-range buckets.

Threshold comparisons are ``>= t`` throughout. Ratios with a zero
denominator are defined as 0 (accuracy excepted: its denominator is the
pixel count, which is positive).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .confmaps import ConfidenceMap
from .errors import ValidationError
from .grids import BinaryMask, ScoreMap

MapLike = ConfidenceMap | ScoreMap

BIN_EDGES = tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class SegMetrics:
    iou: float
    precision: float
    recall: float
    f1: float
    accuracy: float


@dataclass(frozen=True)
class CalibrationBin:
    lower: float
    upper: float
    pixel_count: int
    positive_count: int
    fraction: float | None


@dataclass(frozen=True)
class CalibrationTable:
    bins: tuple[CalibrationBin, ...]

    def total_pixels(self) -> int:
        return sum(b.pixel_count for b in self.bins)


@dataclass(frozen=True)
class ThresholdGrid:
    values: tuple[float, ...] = tuple(i / 10 for i in range(1, 10))

    def __post_init__(self):
        if not self.values:
            raise ValidationError("threshold grid must not be empty")
        if any(not 0.0 < t < 1.0 for t in self.values):
            raise ValidationError(f"thresholds must lie in (0, 1): {self.values}")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError(f"thresholds must be strictly increasing: {self.values}")


DEFAULT_GRID = ThresholdGrid()


@dataclass(frozen=True)
class PerImageSweep:
    id: str
    best_threshold: float
    best_iou: float
    default_iou: float


@dataclass(frozen=True)
class GainBin:
    lower: float
    upper: float
    mean_gain: float
    sample_count: int


@dataclass(frozen=True)
class RocCurve:
    thresholds: tuple[float, ...]
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]


@dataclass(frozen=True)
class EvalReport:
    method: str
    auc: float
    auc_pooling: str
    iou_a: float
    calibration: CalibrationTable
    per_image: tuple[PerImageSweep, ...]
    gain_bins: tuple[GainBin, ...]
    roc: RocCurve
    threshold_grid: tuple[float, ...]
    default_tau: float


def _aligned(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
             ids: Sequence[str] | None) -> list[str]:
    if len(maps) == 0:
        raise ValidationError("no maps to evaluate")
    if len(maps) != len(truths):
        raise ValidationError(f"{len(maps)} maps vs {len(truths)} truths")
    if ids is not None and len(ids) != len(maps):
        raise ValidationError(f"{len(maps)} maps vs {len(ids)} ids")
    names = list(ids) if ids is not None else [f"image {i}" for i in range(len(maps))]
    for name, m, t in zip(names, maps, truths):
        if m.data.shape != t.data.shape:
            raise ValidationError(
                f"{name}: map is {m.data.shape}, truth is {t.data.shape}"
            )
    return names


def confusion(pred: BinaryMask, truth: BinaryMask) -> Confusion:
    """Exact pixel counts; the positive class is 1."""
    if pred.data.shape != truth.data.shape:
        raise ValidationError(
            f"prediction is {pred.data.shape}, truth is {truth.data.shape}"
        )
    p = pred.data.astype(bool)
    t = truth.data.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def seg_metrics(c: Confusion) -> SegMetrics:
    if c.total <= 0:
        raise ValidationError("empty confusion")
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return SegMetrics(
        iou=_ratio(c.tp, c.tp + c.fp + c.fn),
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(c.tp + c.tn) / c.total,
    )


def _bin_indices(values: np.ndarray) -> np.ndarray:
    """Half-open decade bins, the last bin closed: [0,.1), ..., [.9,1]."""
    return np.minimum(np.floor(values * 10.0).astype(np.int64), 9)


def calibration_table(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
                      ids: Sequence[str] | None = None) -> CalibrationTable:
    """Pool all pixels and count actual positives per confidence bin."""
    _aligned(maps, truths, ids)
    counts = np.zeros(10, dtype=np.int64)
    positives = np.zeros(10, dtype=np.int64)
    for m, t in zip(maps, truths):
        idx = _bin_indices(m.data.astype(np.float64).reshape(-1))
        counts += np.bincount(idx, minlength=10)
        positives += np.bincount(idx[t.data.reshape(-1) == 1], minlength=10)
    bins = tuple(
        CalibrationBin(
            lower=BIN_EDGES[i],
            upper=BIN_EDGES[i + 1],
            pixel_count=int(counts[i]),
            positive_count=int(positives[i]),
            fraction=(int(positives[i]) / int(counts[i])) if counts[i] > 0 else None,
        )
        for i in range(10)
    )
    return CalibrationTable(bins)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their group's average rank."""
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    n = len(values)
    boundaries = np.flatnonzero(ordered[1:] != ordered[:-1]) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [n]))
    group_ranks = (starts + ends + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(group_ranks, ends - starts)
    return ranks


def _auc_single(scores: np.ndarray, labels: np.ndarray, scope: str) -> float:
    positives = labels == 1
    p = int(np.count_nonzero(positives))
    n = len(labels) - p
    if p == 0 or n == 0:
        raise ValidationError(
            f"{scope}: AUC undefined, {p} positive and {n} negative pixels"
        )
    ranks = _average_ranks(scores)
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - p * (p + 1) / 2.0) / (p * float(n))


def auc(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
        pooling: str = "pooled", ids: Sequence[str] | None = None) -> float:
    """Probability a random positive pixel outranks a random negative one.

    Mann-Whitney statistic with average-rank tie correction. ``pooled``
    ranks all pixels together; ``per_image_mean`` averages per-image AUCs
    without weighting.
    """
    names = _aligned(maps, truths, ids)
    if pooling == "pooled":
        scores = np.concatenate([m.data.astype(np.float64).reshape(-1) for m in maps])
        labels = np.concatenate([t.data.reshape(-1) for t in truths])
        return _auc_single(scores, labels, "pooled scope")
    if pooling == "per_image_mean":
        per_image = [
            _auc_single(m.data.astype(np.float64).reshape(-1), t.data.reshape(-1), name)
            for name, m, t in zip(names, maps, truths)
        ]
        return float(np.mean(per_image))
    raise ValidationError(f"unknown AUC pooling {pooling!r}")


def _iou_at(map_data: np.ndarray, truth: np.ndarray, threshold: float) -> float:
    pred = map_data >= threshold
    tp = int(np.count_nonzero(pred & truth))
    union = int(np.count_nonzero(pred | truth))
    return _ratio(tp, union)


def _best_over_grid(map_data: np.ndarray, truth: np.ndarray,
                    grid: ThresholdGrid) -> tuple[float, float]:
    """(best_threshold, best_iou); ties break toward the smallest threshold."""
    best_t, best_iou = grid.values[0], -1.0
    for t in grid.values:
        value = _iou_at(map_data, truth, t)
        if value > best_iou:
            best_t, best_iou = t, value
    return best_t, best_iou


@dataclass(frozen=True)
class IouSweepResult:
    iou_a: float
    per_image: tuple[PerImageSweep, ...]


def iou_a(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
          grid: ThresholdGrid = DEFAULT_GRID, default_tau: float = 0.5,
          ids: Sequence[str] | None = None) -> IouSweepResult:
    """Image-specific thresholding: mean over images of the best grid IoU."""
    names = _aligned(maps, truths, ids)
    records = []
    for name, m, t in zip(names, maps, truths):
        data = m.data.astype(np.float64)
        truth = t.data.astype(bool)
        best_t, best_iou = _best_over_grid(data, truth, grid)
        records.append(PerImageSweep(
            id=name,
            best_threshold=best_t,
            best_iou=best_iou,
            default_iou=_iou_at(data, truth, default_tau),
        ))
    mean_best = float(np.sum([r.best_iou for r in records])) / len(records)
    return IouSweepResult(iou_a=mean_best, per_image=tuple(records))


def iou_gain_by_range(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
                      grid: ThresholdGrid = DEFAULT_GRID, default_tau: float = 0.5,
                      min_samples: int = 3,
                      ids: Sequence[str] | None = None) -> tuple[GainBin, ...]:
    """Mean (best - default) IoU gain, bucketed by the default IoU decade.

    Buckets with fewer than ``min_samples`` images are omitted as too noisy.
    """
    sweep = iou_a(maps, truths, grid, default_tau, ids)
    gains: list[list[float]] = [[] for _ in range(10)]
    for record in sweep.per_image:
        bucket = min(int(record.default_iou * 10.0), 9)
        gains[bucket].append(record.best_iou - record.default_iou)
    result = []
    for i, bucket in enumerate(gains):
        if len(bucket) >= min_samples:
            result.append(GainBin(
                lower=BIN_EDGES[i],
                upper=BIN_EDGES[i + 1],
                mean_gain=float(np.sum(bucket)) / len(bucket),
                sample_count=len(bucket),
            ))
    return tuple(result)


def roc_curve(maps: Sequence[MapLike], truths: Sequence[BinaryMask],
              points: int = 101) -> RocCurve:
    """Pooled (fpr, tpr) at evenly spaced thresholds; prediction is >= t."""
    _aligned(maps, truths, None)
    scores = np.concatenate([m.data.astype(np.float64).reshape(-1) for m in maps])
    labels = np.concatenate([t.data.reshape(-1) for t in truths]) == 1
    pos = np.sort(scores[labels])
    neg = np.sort(scores[~labels])
    if len(pos) == 0 or len(neg) == 0:
        raise ValidationError("ROC undefined: need positive and negative pixels")
    thresholds = tuple(i / (points - 1) for i in range(points))
    tpr = tuple(float(len(pos) - np.searchsorted(pos, t, side="left")) / len(pos)
                for t in thresholds)
    fpr = tuple(float(len(neg) - np.searchsorted(neg, t, side="left")) / len(neg)
                for t in thresholds)
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr)


def build_report(method: str, maps: Sequence[MapLike], truths: Sequence[BinaryMask],
                 ids: Sequence[str], grid: ThresholdGrid = DEFAULT_GRID,
                 default_tau: float = 0.5, auc_pooling: str = "pooled",
                 min_samples: int = 3) -> EvalReport:
    sweep = iou_a(maps, truths, grid, default_tau, ids)
    return EvalReport(
        method=method,
        auc=auc(maps, truths, auc_pooling, ids),
        auc_pooling=auc_pooling,
        iou_a=sweep.iou_a,
        calibration=calibration_table(maps, truths, ids),
        per_image=sweep.per_image,
        gain_bins=iou_gain_by_range(maps, truths, grid, default_tau, min_samples, ids),
        roc=roc_curve(maps, truths),
        threshold_grid=grid.values,
        default_tau=default_tau,
    )


def report_to_json(report: EvalReport) -> dict:
    return {
        "method": report.method,
        "auc": report.auc,
        "auc_pooling": report.auc_pooling,
        "iou_a": report.iou_a,
        "default_tau": report.default_tau,
        "threshold_grid": list(report.threshold_grid),
        "calibration": [
            {
                "lower": b.lower, "upper": b.upper,
                "pixel_count": b.pixel_count, "positive_count": b.positive_count,
                "fraction": b.fraction,
            }
            for b in report.calibration.bins
        ],
        "per_image": [
            {
                "id": r.id, "best_threshold": r.best_threshold,
                "best_iou": r.best_iou, "default_iou": r.default_iou,
            }
            for r in report.per_image
        ],
        "gain_bins": [
            {
                "lower": g.lower, "upper": g.upper,
                "mean_gain": g.mean_gain, "sample_count": g.sample_count,
            }
            for g in report.gain_bins
        ],
        "roc": {
            "thresholds": list(report.roc.thresholds),
            "fpr": list(report.roc.fpr),
            "tpr": list(report.roc.tpr),
        },
    }


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                         for v in row])
    return buf.getvalue()


def write_report_files(report: EvalReport, out_dir) -> None:
    """Emit report.json plus calibration.csv, per_image.csv and gains.csv."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(report_to_json(report), indent=2, sort_keys=True) + "\n"
    (out / "report.json").write_text(payload)
    (out / "calibration.csv").write_text(_csv_text(
        ["lower", "upper", "pixel_count", "positive_count", "fraction"],
        [[b.lower, b.upper, b.pixel_count, b.positive_count, b.fraction]
         for b in report.calibration.bins],
    ))
    (out / "per_image.csv").write_text(_csv_text(
        ["id", "best_threshold", "best_iou", "default_iou"],
        [[r.id, r.best_threshold, r.best_iou, r.default_iou] for r in report.per_image],
    ))
    (out / "gains.csv").write_text(_csv_text(
        ["lower", "upper", "mean_gain", "sample_count"],
        [[g.lower, g.upper, g.mean_gain, g.sample_count] for g in report.gain_bins],
    ))
