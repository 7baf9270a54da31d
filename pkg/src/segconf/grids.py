"""Core raster types: images, score maps and binary masks.

All types are thin immutable wrappers around numpy arrays with validated
invariants. Construction is the only place validation happens; afterwards a
grid can be shared freely across threads (the wrapped array is marked
read-only).

Conventions: arrays are row-major with the origin at the top-left corner.
Images are channel-interleaved ``(H, W, C)`` float32 in [0, 1]; score maps
are ``(H, W)`` float32 in [0, 1]; masks are ``(H, W)`` uint8 in {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _check_unit_range(data: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data))[0])
        raise ValidationError(f"{what}: non-finite value at index {bad}")
    if data.size and (float(data.min()) < 0.0 or float(data.max()) > 1.0):
        flat = data.reshape(-1)
        bad = int(np.flatnonzero((flat < 0.0) | (flat > 1.0))[0])
        raise ValidationError(
            f"{what}: value out of range [0, 1] at index {bad}: {flat[bad]!r}"
        )


@dataclass(frozen=True)
class ScoreMap:
    """Per-pixel scores in [0, 1], stored as float32."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValidationError(f"ScoreMap needs a 2-D array, got shape {data.shape}")
        if data.size == 0:
            raise ValidationError("ScoreMap must not be empty")
        if data.dtype != np.float32:
            data = data.astype(np.float32)
        _check_unit_range(data, "ScoreMap")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Image:
    """Normalized image, ``(H, W, C)`` float32 in [0, 1] with C in {1, 3}."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValidationError(
                f"Image needs shape (H, W, 1) or (H, W, 3), got {data.shape}"
            )
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise ValidationError("Image must not be empty")
        if data.dtype != np.float32:
            data = data.astype(np.float32)
        _check_unit_range(data, "Image")
        object.__setattr__(self, "data", _freeze(data))

    @classmethod
    def from_planes(cls, *planes: np.ndarray) -> "Image":
        """Stack single-channel planes (each ``(H, W)``) into an image."""
        return cls(np.stack([np.asarray(p) for p in planes], axis=-1))

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "Image":
        """8-bit input, divided by 255 exactly."""
        arr = np.asarray(data)
        if arr.dtype != np.uint8:
            raise ValidationError(f"from_uint8 expects uint8, got {arr.dtype}")
        return cls(arr.astype(np.float32) / np.float32(255.0))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def plane(self, channel: int) -> np.ndarray:
        """One channel as a read-only ``(H, W)`` float32 view."""
        return self.data[:, :, channel]


@dataclass(frozen=True)
class BinaryMask:
    """Hard labels in {0, 1}, stored as uint8."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValidationError(f"BinaryMask needs a 2-D array, got shape {data.shape}")
        if data.size == 0:
            raise ValidationError("BinaryMask must not be empty")
        if data.dtype == np.bool_:
            data = data.astype(np.uint8)
        if data.dtype != np.uint8:
            converted = data.astype(np.uint8)
            if not np.array_equal(converted, data):
                raise ValidationError("BinaryMask values must be exactly 0 or 1")
            data = converted
        if data.size and int(data.max()) > 1:
            raise ValidationError("BinaryMask values must be exactly 0 or 1")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def foreground_fraction(self) -> float:
        return float(self.data.sum()) / float(self.data.size)


@dataclass(frozen=True)
class Sample:
    """One test case: post-event image, optional pre-event image, ground truth."""

    id: str
    post_image: Image
    truth: BinaryMask
    pre_image: Image | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("Sample id must be non-empty")
        shapes = {(self.post_image.height, self.post_image.width),
                  (self.truth.height, self.truth.width)}
        if self.pre_image is not None:
            shapes.add((self.pre_image.height, self.pre_image.width))
        if len(shapes) != 1:
            raise ValidationError(f"Sample {self.id!r}: rasters disagree on shape: {sorted(shapes)}")

    @property
    def height(self) -> int:
        return self.post_image.height

    @property
    def width(self) -> int:
        return self.post_image.width

    @property
    def is_multi(self) -> bool:
        return self.pre_image is not None
