"""Test-time augmentation transform algebra.

Six geometric transforms (index permutations with exact inverses), three
parametric visual transforms, and the canonical 286-entry catalog: all
240 geometric-visual pairs, the 6 geometric transforms alone and the 40
visual transforms alone. The unaugmented image is deliberately not a
catalog member; it is covered by the pre-threshold map.

Geometric transforms are exact permutations, so applying one and then its
inverse is a bit-exact identity. Gaussian blur accumulates mirrored taps
pairwise, which makes it commute bit-exactly with horizontal/vertical flips
(IEEE addition is commutative).
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grids import Image, Sample, ScoreMap


class GeometricKind(enum.Enum):
    IDENTITY = "identity"
    HFLIP = "hflip"
    VFLIP = "vflip"
    MAIN_DIAG = "main_diag"   # transpose
    ANTI_DIAG = "anti_diag"   # transpose, then reverse both axes
    ROT90 = "rot90"           # counter-clockwise quarter turn
    ROT270 = "rot270"


class VisualKind(enum.Enum):
    IDENTITY = "identity"
    GAUSSIAN_BLUR = "gaussian_blur"
    LINEAR_CONTRAST = "linear_contrast"
    BRIGHTNESS = "brightness"


_PARAM_NAMES = {
    VisualKind.GAUSSIAN_BLUR: "sigma",
    VisualKind.LINEAR_CONTRAST: "alpha",
    VisualKind.BRIGHTNESS: "beta",
}

_INVERSE = {
    GeometricKind.IDENTITY: GeometricKind.IDENTITY,
    GeometricKind.HFLIP: GeometricKind.HFLIP,
    GeometricKind.VFLIP: GeometricKind.VFLIP,
    GeometricKind.MAIN_DIAG: GeometricKind.MAIN_DIAG,
    GeometricKind.ANTI_DIAG: GeometricKind.ANTI_DIAG,
    GeometricKind.ROT90: GeometricKind.ROT270,
    GeometricKind.ROT270: GeometricKind.ROT90,
}

_SHAPE_PRESERVING = {GeometricKind.IDENTITY, GeometricKind.HFLIP, GeometricKind.VFLIP}


@dataclass(frozen=True)
class VisualTransform:
    kind: VisualKind
    value: float | None = None

    def __post_init__(self):
        if self.kind is VisualKind.IDENTITY:
            if self.value is not None:
                raise ValidationError("identity visual transform takes no parameter")
            return
        if self.value is None:
            raise ValidationError(f"{self.kind.value} needs a parameter")
        if self.kind is VisualKind.GAUSSIAN_BLUR and not self.value > 0:
            raise ValidationError(f"blur sigma must be > 0, got {self.value}")
        if self.kind is VisualKind.LINEAR_CONTRAST and not self.value > 0:
            raise ValidationError(f"contrast alpha must be > 0, got {self.value}")
        if self.kind is VisualKind.BRIGHTNESS and not -1.0 <= self.value <= 1.0:
            raise ValidationError(f"brightness beta must be in [-1, 1], got {self.value}")


IDENTITY_VISUAL = VisualTransform(VisualKind.IDENTITY)


@dataclass(frozen=True)
class AugmentationSpec:
    geometric: GeometricKind
    visual: VisualTransform

    def __post_init__(self):
        if self.geometric is GeometricKind.IDENTITY and self.visual.kind is VisualKind.IDENTITY:
            raise ValidationError(
                "augmentation must not be identity in both parts; "
                "the unaugmented image belongs to the pre-threshold map"
            )


@dataclass(frozen=True)
class Catalog:
    entries: tuple[AugmentationSpec, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("catalog must not be empty")
        if len(set(self.entries)) != len(self.entries):
            raise ValidationError("catalog contains duplicate entries")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _permute(arr: np.ndarray, kind: GeometricKind) -> np.ndarray:
    if kind is GeometricKind.IDENTITY:
        return arr
    if kind is GeometricKind.HFLIP:
        return arr[:, ::-1]
    if kind is GeometricKind.VFLIP:
        return arr[::-1, :]
    if kind is GeometricKind.MAIN_DIAG:
        return arr.swapaxes(0, 1)
    if kind is GeometricKind.ANTI_DIAG:
        return arr.swapaxes(0, 1)[::-1, ::-1]
    if kind is GeometricKind.ROT90:
        return np.rot90(arr, 1)
    if kind is GeometricKind.ROT270:
        return np.rot90(arr, 3)
    raise ValidationError(f"unknown geometric kind {kind!r}")


def apply_geometric(kind: GeometricKind, grid: Image | ScoreMap):
    """Apply an exact index permutation; no interpolation.

    Shape-changing kinds (diagonal flips, rotations) require square grids.
    """
    h, w = grid.data.shape[0], grid.data.shape[1]
    if kind not in _SHAPE_PRESERVING and h != w:
        raise ValidationError(
            f"{kind.value} requires a square grid, got {h}x{w}"
        )
    return type(grid)(_permute(grid.data, kind))  # constructor makes the contiguous copy


def invert_geometric(kind: GeometricKind) -> GeometricKind:
    return _INVERSE[kind]


def blur_radius(sigma: float) -> int:
    return math.ceil(3.0 * sigma)


def blur_kernel(sigma: float) -> np.ndarray:
    """One-sided normalized kernel: weights for offsets 0..radius."""
    if sigma <= 0:
        raise ValidationError(f"blur sigma must be > 0, got {sigma}")
    offsets = np.arange(blur_radius(sigma) + 1, dtype=np.float64)
    weights = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    total = weights[0] + 2.0 * weights[1:].sum()
    return weights / total


def _reflect_indices(n: int, radius: int) -> np.ndarray:
    """Mirror-without-edge-repeat index map of length n + 2*radius."""
    idx = np.arange(-radius, n + radius)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def _convolve_axis(plane: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    # Mirrored taps are paired before scaling; IEEE addition is commutative,
    # so the result commutes bit-exactly with a flip along `axis`.
    radius = len(kernel) - 1
    n = plane.shape[axis]
    if axis == 0:
        padded = plane[_reflect_indices(n, radius), :]
        window = lambda off: padded[off:off + n, :]
    else:
        padded = plane[:, _reflect_indices(n, radius)]
        window = lambda off: padded[:, off:off + n]
    out = kernel[0] * window(radius)
    buf = np.empty_like(out)
    for j in range(1, radius + 1):
        np.add(window(radius - j), window(radius + j), out=buf)
        buf *= kernel[j]
        out += buf
    return out


def _blur_ordered(img: Image, sigma: float, cols_first: bool) -> Image:
    kernel = blur_kernel(sigma)
    axes = (0, 1) if cols_first else (1, 0)
    planes = []
    for c in range(img.channels):
        plane = img.plane(c).astype(np.float64)
        plane = _convolve_axis(plane, kernel, axis=axes[0])
        plane = _convolve_axis(plane, kernel, axis=axes[1])
        planes.append(np.clip(plane, 0.0, 1.0).astype(np.float32))
    return Image.from_planes(*planes)


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Separable Gaussian blur, kernel truncated at radius ceil(3*sigma).

    Runs in float64 per channel with reflective borders, then clamps to
    [0, 1] and stores as float32.
    """
    return _blur_ordered(img, sigma, cols_first=False)


def linear_contrast(img: Image, alpha: float) -> Image:
    """Scale values around mid-gray: clamp(0.5 + alpha*(v - 0.5))."""
    if alpha <= 0:
        raise ValidationError(f"contrast alpha must be > 0, got {alpha}")
    values = 0.5 + alpha * (img.data.astype(np.float64) - 0.5)
    return Image(np.clip(values, 0.0, 1.0).astype(np.float32))


def brightness(img: Image, beta: float) -> Image:
    """Shift values: clamp(v + beta)."""
    if not -1.0 <= beta <= 1.0:
        raise ValidationError(f"brightness beta must be in [-1, 1], got {beta}")
    values = img.data.astype(np.float64) + beta
    return Image(np.clip(values, 0.0, 1.0).astype(np.float32))


def apply_visual(transform: VisualTransform, img: Image) -> Image:
    if transform.kind is VisualKind.IDENTITY:
        return img
    if transform.kind is VisualKind.GAUSSIAN_BLUR:
        return gaussian_blur(img, transform.value)
    if transform.kind is VisualKind.LINEAR_CONTRAST:
        return linear_contrast(img, transform.value)
    if transform.kind is VisualKind.BRIGHTNESS:
        return brightness(img, transform.value)
    raise ValidationError(f"unknown visual kind {transform.kind!r}")


def apply_spec(spec: AugmentationSpec, sample: Sample) -> Sample:
    """Transform a sample: geometric first, then visual, on both images.

    The truth mask is never transformed; predictions are aligned back to it
    by the inverse geometric transform instead.
    """
    def transform(img: Image) -> Image:
        return apply_visual(spec.visual, apply_geometric(spec.geometric, img))

    return Sample(
        id=sample.id,
        post_image=transform(sample.post_image),
        pre_image=None if sample.pre_image is None else transform(sample.pre_image),
        truth=sample.truth,
    )


_TRANSPOSING = {
    GeometricKind.MAIN_DIAG,
    GeometricKind.ANTI_DIAG,
    GeometricKind.ROT90,
    GeometricKind.ROT270,
}


class CatalogApplier:
    """Bit-exact cached :func:`apply_spec` over one sample.

    Pointwise visual transforms commute with every index permutation, and
    the blur commutes bit-exactly with flips (mirrored-tap pairing) while a
    transpose merely swaps its two separable passes. So one rows-first and
    one columns-first blur per sigma cover the whole dihedral group, and the
    visual transform can be cached once per sample instead of being
    recomputed for each geometric partner. Outputs are bit-identical to
    ``apply_spec(spec, sample)``.
    """

    def __init__(self, sample: Sample):
        self._sample = sample
        self._cache: dict[tuple[VisualTransform, bool], tuple[Image, Image | None]] = {}

    def _visual_images(self, visual: VisualTransform, cols_first: bool):
        key = (visual, cols_first and visual.kind is VisualKind.GAUSSIAN_BLUR)
        cached = self._cache.get(key)
        if cached is None:
            if visual.kind is VisualKind.GAUSSIAN_BLUR:
                def apply(img):
                    return _blur_ordered(img, visual.value, cols_first=key[1])
            else:
                def apply(img):
                    return apply_visual(visual, img)
            pre = self._sample.pre_image
            cached = (apply(self._sample.post_image),
                      None if pre is None else apply(pre))
            self._cache[key] = cached
        return cached

    def augmented(self, spec: AugmentationSpec) -> Sample:
        cols_first = spec.geometric in _TRANSPOSING
        post, pre = self._visual_images(spec.visual, cols_first)
        return Sample(
            id=self._sample.id,
            post_image=apply_geometric(spec.geometric, post),
            pre_image=None if pre is None else apply_geometric(spec.geometric, pre),
            truth=self._sample.truth,
        )


# Parameter grids for the canonical catalog. The source method counts
# 20 blurs, 10 contrasts and 10 brightness offsets but leaves the values
# open; these grids are mild perturbations, declared once and frozen.
def _even_grid(lo: float, hi: float, n: int) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


BLUR_SIGMAS = tuple(_even_grid(0.5, 3.0, 20))
CONTRAST_ALPHAS = tuple(_even_grid(0.7, 1.3, 10))
BRIGHTNESS_BETAS = tuple(_even_grid(-0.2, 0.2, 10))

_GEOMETRICS = (
    GeometricKind.HFLIP,
    GeometricKind.VFLIP,
    GeometricKind.MAIN_DIAG,
    GeometricKind.ANTI_DIAG,
    GeometricKind.ROT90,
    GeometricKind.ROT270,
)


def _visual_grid() -> list[VisualTransform]:
    visuals = [VisualTransform(VisualKind.GAUSSIAN_BLUR, s) for s in BLUR_SIGMAS]
    visuals += [VisualTransform(VisualKind.LINEAR_CONTRAST, a) for a in CONTRAST_ALPHAS]
    visuals += [VisualTransform(VisualKind.BRIGHTNESS, b) for b in BRIGHTNESS_BETAS]
    return visuals


def build_catalog() -> Catalog:
    """The canonical 286-entry catalog, deterministic across runs.

    Order: pairs in geometric-major order, then geometric singletons, then
    visual singletons.
    """
    visuals = _visual_grid()
    entries = [AugmentationSpec(g, v) for g in _GEOMETRICS for v in visuals]
    entries += [AugmentationSpec(g, IDENTITY_VISUAL) for g in _GEOMETRICS]
    entries += [AugmentationSpec(GeometricKind.IDENTITY, v) for v in visuals]
    return Catalog(tuple(entries))


def spec_to_json(spec: AugmentationSpec) -> dict:
    visual: dict = {"kind": spec.visual.kind.value}
    if spec.visual.value is not None:
        visual[_PARAM_NAMES[spec.visual.kind]] = spec.visual.value
    return {"geometric": spec.geometric.value, "visual": visual}


def catalog_to_json(catalog: Catalog) -> list[dict]:
    return [spec_to_json(s) for s in catalog]


def catalog_checksum(catalog: Catalog) -> str:
    blob = json.dumps(catalog_to_json(catalog), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()
