"""Preprocessing of real artefact crops into model-ready glyph images.

Color crops become grayscale via fixed Rec.601 luminance weights;
signature seals (painted by the user as rectangles or a mask) are filled
with the median intensity of a surrounding ring; rubbings and other
light-on-dark sources are inverted on request; finally the crop is resized
to 64x64 preserving aspect ratio, padded with background.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image
from scipy import ndimage

from ..glyphsim.image import GLYPH_SIZE

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)
_RING_WIDTH = 3


class ImageDecodeError(ValueError):
    pass


def _to_grayscale(raw: bytes | np.ndarray) -> np.ndarray:
    if isinstance(raw, np.ndarray):
        if raw.size == 0:
            raise ValueError("empty crop")
        arr = raw.astype(np.float64)
        if arr.ndim == 3:
            if arr.shape[2] < 3:
                arr = arr[:, :, 0]
            else:
                arr = arr[:, :, :3] @ _LUMA
        if arr.max() > 1.0:
            arr = arr / 255.0
        return np.clip(arr, 0.0, 1.0)
    try:
        with Image.open(io.BytesIO(raw)) as im:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except Exception as e:
        raise ImageDecodeError(f"cannot decode image: {e}") from e
    return np.clip(rgb @ _LUMA / 255.0, 0.0, 1.0)


def _seal_mask(shape: tuple[int, int], regions) -> np.ndarray:
    if isinstance(regions, np.ndarray):
        if regions.shape != shape:
            raise ValueError(f"seal mask shape {regions.shape} does not match image {shape}")
        return regions.astype(bool)
    mask = np.zeros(shape, dtype=bool)
    for x0, y0, x1, y1 in regions:
        if not (0 <= x0 <= x1 <= shape[1] and 0 <= y0 <= y1 <= shape[0]):
            raise ValueError(f"seal region ({x0},{y0},{x1},{y1}) outside bounds {shape}")
        mask[int(y0) : int(y1), int(x0) : int(x1)] = True
    return mask


def _fill_seals(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        return img
    ring = ndimage.binary_dilation(mask, iterations=_RING_WIDTH) & ~mask
    fill = float(np.median(img[ring])) if ring.any() else float(np.median(img))
    out = img.copy()
    out[mask] = fill
    return out


def _resize_with_padding(img: np.ndarray, size: int) -> np.ndarray:
    h, w = img.shape
    if h == 0 or w == 0:
        raise ValueError("empty crop")
    if (h, w) == (size, size):
        return img
    scale = size / max(h, w)
    nh = max(1, int(round(h * scale)))
    nw = max(1, int(round(w * scale)))
    pil = Image.fromarray(np.clip(img * 255.0, 0, 255).astype(np.uint8), mode="L")
    pil = pil.resize((nw, nh), Image.BILINEAR)
    out = np.ones((size, size), dtype=np.float64)
    y0 = (size - nh) // 2
    x0 = (size - nw) // 2
    out[y0 : y0 + nh, x0 : x0 + nw] = np.asarray(pil, dtype=np.float64) / 255.0
    return out


def preprocess_image(
    raw: bytes | np.ndarray,
    seal_regions=None,
    invert: bool = False,
    size: int = GLYPH_SIZE,
) -> np.ndarray:
    """Grayscale, seal fill, optional inversion, aspect-preserving resize.

    ``seal_regions`` is either a boolean mask matching the input or a list
    of (x0, y0, x1, y1) rectangles.
    """
    img = _to_grayscale(raw)
    if img.size == 0:
        raise ValueError("empty crop")
    if seal_regions is not None:
        img = _fill_seals(img, _seal_mask(img.shape, seal_regions))
    if invert:
        img = 1.0 - img
    return _resize_with_padding(img, size).astype(np.float32)
