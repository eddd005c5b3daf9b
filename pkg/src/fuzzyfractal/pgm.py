"""Binary PGM (P5) read/write for grayscale renders.

Grid fuzzy sets render with row 0 of the grid at the bottom of the image
(y grows upward in space, downward in image files). At 255 membership
levels the mapping tick <-> pixel byte is the identity, so a written image
reads back to exactly the same fuzzy set.
"""

import numpy as np

from .fuzzy import FuzzySet
from .spaces import GridSpace


class PgmError(ValueError):
    """Malformed PGM data."""


def write_pgm(path, pixels) -> None:
    """Write a height x width array of 0..255 values as binary P5."""
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise PgmError("pixel array must be 2-D")
    if arr.min() < 0 or arr.max() > 255:
        raise PgmError("pixel values must lie in 0..255")
    arr = arr.astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 file back into a height x width uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise PgmError("not a binary PGM (P5) file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with optional '#' comment lines; pixel bytes follow the maxval token's
    # single whitespace terminator.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # the single whitespace after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise PgmError("malformed PGM header") from None
    if maxval != 255:
        raise PgmError(f"only maxval 255 is supported, got {maxval}")
    body = data[pos:pos + w * h]
    if len(body) != w * h:
        raise PgmError(f"expected {w * h} pixel bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)


def fuzzy_to_pixels(u: FuzzySet) -> np.ndarray:
    """Pixel array for a grid fuzzy set: round(255 * membership), top row first."""
    if not isinstance(u.space, GridSpace):
        raise PgmError("only grid fuzzy sets render to images")
    if u.levels == 255:
        ticks = u.data
    else:
        ticks = np.floor(u.data.astype(np.float64) * 255.0 / u.levels + 0.5).astype(np.int64)
    return np.flipud(ticks).astype(np.uint8)


def pixels_to_fuzzy(space: GridSpace, pixels, levels: int = 255) -> FuzzySet:
    """Rebuild a grid fuzzy set from an image (exact round trip at 255 levels)."""
    arr = np.asarray(pixels)
    if arr.shape != (space.height, space.width):
        raise PgmError(f"image is {arr.shape}, grid needs {(space.height, space.width)}")
    if levels == 255:
        ticks = np.flipud(arr).astype(np.int32)
    else:
        ticks = np.floor(np.flipud(arr).astype(np.float64) * levels / 255.0 + 0.5).astype(np.int32)
    return FuzzySet(space, levels, ticks)


def save_fuzzy(path, u: FuzzySet) -> None:
    write_pgm(path, fuzzy_to_pixels(u))


def load_fuzzy(path, space: GridSpace, levels: int = 255) -> FuzzySet:
    return pixels_to_fuzzy(space, read_pgm(path), levels)
