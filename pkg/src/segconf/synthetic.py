"""Seeded synthetic data: landslide-shaped datasets and a stand-in scorer.

The generator replaces a real satellite dataset at desk scale: ground truth
is a union of random axis-aligned ellipses (1-15% foreground), the
post-event image shifts the masked region toward a brown hue over a smooth
terrain-like base, and the pre-event image is the same base without the
shift. Everything is addressed through counter-based hashing, so a spec
reproduces bit-identically on any platform.

The scorer squashes a red-green difference plus a local-contrast term
through an algebraic sigmoid. Only IEEE-exact operations (+, -, *, /, abs)
are used, in a documented evaluation order, so an external implementation
can reproduce it float32-bit-exactly; see README "External scorer protocol".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grids import BinaryMask, Image, Sample, ScoreMap
from .hashing import MASK64, CounterStream, derive_key, fnv1a64, hashed_unit, mix64

# Frozen scorer constants (protocol-level; the external parity scorer
# mirrors them).
SCORE_SHARPNESS = 9.0       # weight on the red-green difference
SCORE_CONTRAST_WEIGHT = 3.0  # weight on the local-contrast term
SCORE_OFFSET = 0.08          # red-green value mapping to score 0.5
SCORE_PRE_WEIGHT = 0.75      # subtraction weight for the pre-event image
SCORE_NOISE_AMPLITUDE = 0.6  # stochastic perturbation added before the squash

_BASE_LOW = (0.18, 0.28, 0.10)
_BASE_SPAN = (0.30, 0.32, 0.25)
_BROWN_SHIFT = (0.11, -0.03, -0.025)
_COARSE_CELLS = 8  # smooth base lattice resolution

_ACCEPT_LOW, _ACCEPT_HIGH = 0.012, 0.145  # inside the committed [0.01, 0.15]
_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    count: int
    height: int
    width: int
    blob_count_range: tuple[int, int] = (1, 4)
    noise_level: float = 0.05

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError(f"count must be >= 1, got {self.count}")
        if self.height != self.width:
            raise ValidationError(
                f"synthetic images are square, got {self.height}x{self.width}"
            )
        if self.height < 8:
            raise ValidationError(f"image side must be >= 8, got {self.height}")
        lo, hi = self.blob_count_range
        if not 1 <= lo <= hi:
            raise ValidationError(f"bad blob count range {self.blob_count_range}")
        if not 0.0 <= self.noise_level <= 0.5:
            raise ValidationError(f"noise level must be in [0, 0.5], got {self.noise_level}")


def _ellipse_mask(h: int, w: int, stream: CounterStream, blobs: int) -> np.ndarray:
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(blobs):
        cy = stream.uniform(lo=0.15, hi=0.85) * h
        cx = stream.uniform(lo=0.15, hi=0.85) * w
        area = stream.uniform(lo=0.008, hi=0.058)  # fraction of the image
        aspect = stream.uniform(lo=0.5, hi=2.0)
        ry = np.sqrt(area * aspect / np.pi) * h
        rx = np.sqrt(area / (aspect * np.pi)) * w
        mask |= ((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0
    return mask


def _truth_mask(spec: SyntheticSpec, stream: CounterStream) -> np.ndarray:
    lo, hi = spec.blob_count_range
    for _ in range(_MAX_ATTEMPTS):
        blobs = stream.integer(lo, hi)
        mask = _ellipse_mask(spec.height, spec.width, stream, blobs)
        fraction = mask.mean()
        if _ACCEPT_LOW <= fraction <= _ACCEPT_HIGH:
            return mask
    # Deterministic fallback: one centered ellipse, ~6% coverage.
    ys = np.arange(spec.height, dtype=np.float64)[:, None]
    xs = np.arange(spec.width, dtype=np.float64)[None, :]
    ry = 0.14 * spec.height
    rx = 0.14 * spec.width
    return ((ys - spec.height / 2.0) / ry) ** 2 + ((xs - spec.width / 2.0) / rx) ** 2 <= 1.0


def _smooth_field(h: int, w: int, stream: CounterStream) -> np.ndarray:
    """Bilinear upsampling of a coarse random lattice; values in [0, 1)."""
    nodes = stream.unit_grid((_COARSE_CELLS + 1, _COARSE_CELLS + 1))
    uy = np.arange(h, dtype=np.float64) * _COARSE_CELLS / h
    ux = np.arange(w, dtype=np.float64) * _COARSE_CELLS / w
    iy = np.minimum(uy.astype(np.int64), _COARSE_CELLS - 1)
    ix = np.minimum(ux.astype(np.int64), _COARSE_CELLS - 1)
    ty = (uy - iy)[:, None]
    tx = (ux - ix)[None, :]
    v00 = nodes[np.ix_(iy, ix)]
    v01 = nodes[np.ix_(iy, ix + 1)]
    v10 = nodes[np.ix_(iy + 1, ix)]
    v11 = nodes[np.ix_(iy + 1, ix + 1)]
    top = v00 * (1.0 - tx) + v01 * tx
    bottom = v10 * (1.0 - tx) + v11 * tx
    return top * (1.0 - ty) + bottom * ty


def generate_sample(spec: SyntheticSpec, index: int) -> Sample:
    """One fully seed-determined sample; independent of other indices."""
    stream = CounterStream(derive_key(spec.seed, "sample", index))
    h, w = spec.height, spec.width

    mask = _truth_mask(spec, stream)
    base = np.empty((h, w, 3), dtype=np.float64)
    for c in range(3):
        base[:, :, c] = _BASE_LOW[c] + _BASE_SPAN[c] * _smooth_field(h, w, stream)

    shift_scale = stream.uniform(lo=0.75, hi=1.25)
    shifted = base.copy()
    for c in range(3):
        shifted[:, :, c] += (shift_scale * _BROWN_SHIFT[c]) * mask

    speckle_post = 2.0 * stream.unit_grid((h, w, 3)) - 1.0
    speckle_pre = 2.0 * stream.unit_grid((h, w, 3)) - 1.0
    post = np.clip(shifted + spec.noise_level * speckle_post, 0.0, 1.0)
    pre = np.clip(base + spec.noise_level * speckle_pre, 0.0, 1.0)

    return Sample(
        id=f"s{index}",
        post_image=Image(post.astype(np.float32)),
        pre_image=Image(pre.astype(np.float32)),
        truth=BinaryMask(mask.astype(np.uint8)),
    )


def generate_synthetic_dataset(spec: SyntheticSpec) -> list[Sample]:
    return [generate_sample(spec, i) for i in range(spec.count)]


def _reflect_index(n: int) -> np.ndarray:
    """Index map of length n+2 implementing radius-1 mirror padding."""
    idx = np.arange(-1, n + 1)
    if n == 1:
        return np.zeros_like(idx)
    idx = np.abs(idx)
    return np.where(idx >= n, 2 * (n - 1) - idx, idx)


def box3_mean(plane: np.ndarray) -> np.ndarray:
    """3x3 box mean with mirror borders, accumulated in row-major tap order."""
    h, w = plane.shape
    padded = plane[np.ix_(_reflect_index(h), _reflect_index(w))]
    acc = padded[0:h, 0:w].copy()
    for dy, dx in ((0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)):
        acc += padded[dy:dy + h, dx:dx + w]
    return acc / 9.0


def noise_key(sample_id: str, seed: int) -> int:
    """Protocol-level key for the stochastic perturbation field."""
    return mix64(fnv1a64(sample_id) ^ mix64(seed & MASK64))


def deterministic_logit(sample: Sample) -> np.ndarray:
    """The pre-squash activation of the synthetic scorer, float64."""
    r = sample.post_image.plane(0).astype(np.float64)
    g = sample.post_image.plane(1).astype(np.float64)
    rg = r - g
    if sample.pre_image is not None:
        rp = sample.pre_image.plane(0).astype(np.float64)
        gp = sample.pre_image.plane(1).astype(np.float64)
        rg = rg - SCORE_PRE_WEIGHT * (rp - gp)
    return SCORE_SHARPNESS * (rg - SCORE_OFFSET) + SCORE_CONTRAST_WEIGHT * (g - box3_mean(g))


def score_from_logit(z: np.ndarray, sample_id: str, seed: int | None) -> ScoreMap:
    """Squash a logit plane to scores, optionally perturbed for ``seed``."""
    if seed is not None:
        counters = np.arange(z.size, dtype=np.uint64)
        u = hashed_unit(noise_key(sample_id, seed), counters).reshape(z.shape)
        z = z + SCORE_NOISE_AMPLITUDE * (2.0 * u - 1.0)
    score = 0.5 + 0.5 * (z / (1.0 + np.abs(z)))
    return ScoreMap(score.astype(np.float32))


def synthetic_score(sample: Sample, seed: int | None = None) -> ScoreMap:
    """Deterministic stand-in for a trained model's pre-threshold output.

    With ``seed`` given, a hashed per-pixel perturbation (reproducible per
    sample id, pixel index and seed) is added before the squash, standing in
    for one dropout mask.
    """
    return score_from_logit(deterministic_logit(sample), sample.id, seed)
