"""The three confidence-map constructions over a pluggable scorer.

Pre-threshold uses the raw scores. Monte-Carlo dropout averages thresholded
masks (the fraction of trials a pixel was classified positive). TTA averages
inverse-aligned pre-threshold scores over an augmentation catalog. The
asymmetry — dropout averages post-threshold, TTA averages pre-threshold —
is deliberate and load-bearing.

Maps accumulate and stay in float64 end to end; they are quantized to
float32 only when written as PFM. This keeps counting identities (dropout
values are exact multiples of 1/trials) and order-invariance intact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .augment import Catalog, CatalogApplier, apply_geometric, invert_geometric
from .errors import CapabilityError, ScorerProtocolError, ValidationError
from .grids import Sample, ScoreMap
from .scorers import Scorer


class Method(enum.Enum):
    PRE_THRESHOLD = "prethresh"
    MC_DROPOUT = "mcdropout"
    TTA = "tta"


@dataclass(frozen=True)
class ConfidenceMap:
    """Per-pixel confidence in [0, 1], float64, tagged with its method."""

    data: np.ndarray
    method: Method

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.size == 0:
            raise ValidationError(f"ConfidenceMap needs a non-empty 2-D array, got {data.shape}")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ValidationError("ConfidenceMap values must be finite and in [0, 1]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def to_scoremap(self) -> ScoreMap:
        return ScoreMap(self.data.astype(np.float32))


def _checked(map_: ScoreMap, sample: Sample) -> ScoreMap:
    if (map_.height, map_.width) != (sample.height, sample.width):
        raise ScorerProtocolError(
            f"scorer returned {map_.height}x{map_.width} for "
            f"{sample.height}x{sample.width} sample {sample.id!r}"
        )
    return map_


def _check_multi(scorer: Scorer, sample: Sample) -> None:
    if sample.is_multi and not scorer.capabilities.multi_image:
        raise CapabilityError(
            f"sample {sample.id!r} carries a pre-event image but the scorer "
            "is not multi-image capable"
        )


def pre_threshold_map(scorer: Scorer, sample: Sample) -> ConfidenceMap:
    """The model's raw scores, used directly as confidence."""
    if not scorer.capabilities.deterministic:
        raise CapabilityError("pre-threshold map needs a deterministic scorer")
    _check_multi(scorer, sample)
    scored = _checked(scorer.score(sample), sample)
    return ConfidenceMap(scored.data.astype(np.float64), Method.PRE_THRESHOLD)


def mc_dropout_map(scorer: Scorer, sample: Sample, trials: int = 286,
                   tau: float = 0.5) -> ConfidenceMap:
    """Fraction of stochastic trials in which each pixel exceeded ``tau``.

    Seeds run 0..trials-1; each trial's map is thresholded (>= tau) and the
    0/1 masks are averaged in trial order with float64 accumulation.
    """
    if not scorer.capabilities.stochastic:
        raise CapabilityError("Monte-Carlo dropout needs a stochastic scorer")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0.0 < tau < 1.0:
        raise ValidationError(f"tau must be in (0, 1), got {tau}")
    _check_multi(scorer, sample)
    acc = np.zeros((sample.height, sample.width), dtype=np.float64)
    for seed in range(trials):
        scored = _checked(scorer.sample_stochastic(sample, seed), sample)
        acc += (scored.data >= tau)
    return ConfidenceMap(acc / trials, Method.MC_DROPOUT)


def tta_map(scorer: Scorer, sample: Sample, catalog: Catalog) -> ConfidenceMap:
    """Mean of inverse-aligned pre-threshold scores over the catalog.

    Each entry augments the sample, scores it, and aligns the score map back
    with the inverse geometric transform; accumulation is float64 in catalog
    order, with one division at the end.
    """
    if not scorer.capabilities.deterministic:
        raise CapabilityError("TTA needs a deterministic scorer")
    if sample.height != sample.width:
        raise ValidationError(
            f"TTA needs square samples, got {sample.height}x{sample.width}"
        )
    _check_multi(scorer, sample)
    applier = CatalogApplier(sample)
    acc = np.zeros((sample.height, sample.width), dtype=np.float64)
    for index, spec in enumerate(catalog):
        augmented = applier.augmented(spec)
        try:
            scored = scorer.score(augmented)
        except Exception as exc:
            raise ScorerProtocolError(f"scorer failed on catalog entry {index}: {exc}") from exc
        aligned = apply_geometric(invert_geometric(spec.geometric), _checked(scored, sample))
        acc += aligned.data
    return ConfidenceMap(acc / len(catalog), Method.TTA)
