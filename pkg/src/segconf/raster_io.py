"""Bit-exact PFM / PGM file I/O.

PFM (Portable FloatMap, grayscale ``Pf``): ASCII header ``Pf``, then
``<width> <height>``, then a scale line whose sign encodes endianness
(negative = little-endian; we always write ``-1.0``), then raw 32-bit floats
in bottom-to-top row order. PGM is binary ``P5`` with maxval 255.

Score maps are probabilities, so reads reject non-finite values and values
outside [0, 1].
"""

from __future__ import annotations

import numpy as np

from .errors import RasterFormatError
from .grids import BinaryMask, Image, ScoreMap

_WHITESPACE = b" \t\n\r\f\v"


def _read_token(buf: bytes, pos: int, path) -> tuple[bytes, int]:
    """Next whitespace-delimited token, skipping ``#`` comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos:pos + 1] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise RasterFormatError(f"{path}: truncated header")
    return buf[start:pos], pos


def _read_dims(buf: bytes, pos: int, path) -> tuple[int, int, int]:
    wtok, pos = _read_token(buf, pos, path)
    htok, pos = _read_token(buf, pos, path)
    try:
        width, height = int(wtok), int(htok)
    except ValueError:
        raise RasterFormatError(f"{path}: malformed dimensions {wtok!r} {htok!r}") from None
    if width <= 0 or height <= 0:
        raise RasterFormatError(f"{path}: non-positive dimensions {width}x{height}")
    return width, height, pos


def write_pfm(grid: ScoreMap | Image, path) -> None:
    """Write a score map (or single-channel image) as a grayscale PFM."""
    if isinstance(grid, Image):
        if grid.channels != 1:
            raise RasterFormatError(
                f"{path}: PFM writer takes a single-channel image, got {grid.channels} channels"
            )
        plane = grid.data[:, :, 0]
    else:
        plane = grid.data
    header = f"Pf\n{plane.shape[1]} {plane.shape[0]}\n-1.0\n".encode("ascii")
    payload = plane[::-1, :].astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_pfm(path) -> ScoreMap:
    """Inverse of :func:`write_pfm`; validates scores are finite and in [0, 1]."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0, path)
    if magic == b"PF":
        raise RasterFormatError(f"{path}: unsupported channel count (color 'PF' variant)")
    if magic != b"Pf":
        raise RasterFormatError(f"{path}: malformed header, magic {magic!r}")
    width, height, pos = _read_dims(buf, pos, path)
    stok, pos = _read_token(buf, pos, path)
    try:
        scale = float(stok)
    except ValueError:
        raise RasterFormatError(f"{path}: malformed scale {stok!r}") from None
    if scale >= 0.0:
        raise RasterFormatError(f"{path}: big-endian PFM (scale {scale}) unsupported")
    if scale != -1.0:
        raise RasterFormatError(f"{path}: unsupported scale factor {scale}")
    pos += 1  # single whitespace byte separates header from payload
    expected = width * height * 4
    payload = buf[pos:pos + expected]
    if len(payload) != expected:
        raise RasterFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    rows = np.frombuffer(payload, dtype="<f4").reshape(height, width)
    data = rows[::-1, :]  # file rows are bottom-to-top
    flat = data.reshape(-1)
    finite = np.isfinite(flat)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise RasterFormatError(f"{path}: non-finite value at index {bad}")
    out_of_range = (flat < 0.0) | (flat > 1.0)
    if out_of_range.any():
        bad = int(np.flatnonzero(out_of_range)[0])
        raise RasterFormatError(
            f"{path}: value out of range [0, 1] at index {bad}: {flat[bad]!r}"
        )
    return ScoreMap(data)


def write_pgm(mask: BinaryMask, path) -> None:
    """Write a mask as binary ``P5`` PGM, 1 -> 255 and 0 -> 0."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    payload = (mask.data * np.uint8(255)).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_pgm(path) -> BinaryMask:
    """Read a ``P5`` PGM as a mask: byte >= 128 -> 1, else 0."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0, path)
    if magic != b"P5":
        raise RasterFormatError(f"{path}: malformed header, magic {magic!r}")
    width, height, pos = _read_dims(buf, pos, path)
    mtok, pos = _read_token(buf, pos, path)
    try:
        maxval = int(mtok)
    except ValueError:
        raise RasterFormatError(f"{path}: malformed maxval {mtok!r}") from None
    if maxval != 255:
        raise RasterFormatError(f"{path}: maxval {maxval} unsupported, expected 255")
    pos += 1
    expected = width * height
    payload = buf[pos:pos + expected]
    if len(payload) != expected:
        raise RasterFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return BinaryMask((raw >= 128).astype(np.uint8))
