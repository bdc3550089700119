"""Glyph image conventions and raster I/O.

A glyph image is a 64x64 float32 array in [0,1]: 0 is ink, 1 is paper.
Sources with light glyphs on dark ground (e.g. rubbings of engraved
inscriptions) must be color-inverted before entering the pipeline.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

GLYPH_SIZE = 64


def validate_glyph(img: np.ndarray) -> np.ndarray:
    if img.shape != (GLYPH_SIZE, GLYPH_SIZE):
        raise ValueError(f"glyph image must be {GLYPH_SIZE}x{GLYPH_SIZE}, got {img.shape}")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"glyph intensities outside [0,1]: [{img.min()}, {img.max()}]")
    return img


def invert_colors(img: np.ndarray) -> np.ndarray:
    """Pixel-wise 1 - v; involutive."""
    return (1.0 - img).astype(img.dtype)


def to_png_bytes(img: np.ndarray) -> bytes:
    arr = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def from_png_bytes(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float32)
    return arr / 255.0


def save_image(img: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(to_png_bytes(img))


def load_image(path: str | Path) -> np.ndarray:
    return from_png_bytes(Path(path).read_bytes())
