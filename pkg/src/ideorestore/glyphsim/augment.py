"""Photometric and geometric augmentation of clean glyph renders.

A single font render cannot stand in for photographs of real artefacts,
so each sample gets a randomized combination of texture, brightness,
contrast, translation, rotation, scaling and Gaussian blur, in that fixed
order. Every stage short-circuits on its identity parameters so identity
params reproduce the input bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import GLYPH_SIZE


def value_noise(shape: tuple[int, int], cell: int, rng: np.random.Generator) -> np.ndarray:
    """Smooth noise field in [0,1]: bilinear interpolation of a coarse random grid."""
    gh = shape[0] // cell + 2
    gw = shape[1] // cell + 2
    grid = rng.random((gh, gw))
    ys = np.arange(shape[0]) / cell
    xs = np.arange(shape[1]) / cell
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    top = g00 * (1 - fx) + g01 * fx
    bot = g10 * (1 - fx) + g11 * fx
    return (top * (1 - fy) + bot * fy).astype(np.float32)


@dataclass(frozen=True)
class AugmentationParams:
    texture_strength: float = 0.0
    brightness_shift: float = 0.0
    contrast_factor: float = 1.0
    translate: tuple[int, int] = (0, 0)  # (dx, dy) pixels
    rotate_deg: float = 0.0
    scale: float = 1.0
    blur_sigma: float = 0.0
    texture_seed: int = 0
    texture_cell: int = 12

    @classmethod
    def identity(cls) -> "AugmentationParams":
        return cls()


@dataclass(frozen=True)
class AugmentationRanges:
    """Configured ranges each parameter is drawn from (uniformly)."""

    texture_strength: tuple[float, float] = (0.0, 0.3)
    brightness: float = 0.15
    contrast: float = 0.2
    translate_px: int = 4
    rotate_deg: float = 8.0
    scale: tuple[float, float] = (0.9, 1.1)
    blur_sigma: tuple[float, float] = (0.0, 1.2)
    texture_cell: int = 12

    @classmethod
    def none(cls) -> "AugmentationRanges":
        return cls(
            texture_strength=(0.0, 0.0),
            brightness=0.0,
            contrast=0.0,
            translate_px=0,
            rotate_deg=0.0,
            scale=(1.0, 1.0),
            blur_sigma=(0.0, 0.0),
        )

    def sample(self, rng: np.random.Generator) -> AugmentationParams:
        return AugmentationParams(
            texture_strength=float(rng.uniform(*self.texture_strength)),
            brightness_shift=float(rng.uniform(-self.brightness, self.brightness)),
            contrast_factor=float(rng.uniform(1.0 - self.contrast, 1.0 + self.contrast)),
            translate=(
                int(rng.integers(-self.translate_px, self.translate_px + 1)),
                int(rng.integers(-self.translate_px, self.translate_px + 1)),
            ),
            rotate_deg=float(rng.uniform(-self.rotate_deg, self.rotate_deg)),
            scale=float(rng.uniform(*self.scale)),
            blur_sigma=float(rng.uniform(*self.blur_sigma)),
            texture_seed=int(rng.integers(0, 2**31 - 1)),
            texture_cell=self.texture_cell,
        )


def _translate(img: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.ones_like(img)
    h, w = img.shape
    src_y = slice(max(0, -dy), min(h, h - dy))
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_y = slice(max(0, dy), min(h, h + dy))
    dst_x = slice(max(0, dx), min(w, w + dx))
    out[dst_y, dst_x] = img[src_y, src_x]
    return out


def _scale_about_center(img: np.ndarray, factor: float) -> np.ndarray:
    c = (np.asarray(img.shape, dtype=np.float64) - 1.0) / 2.0
    matrix = np.eye(2) / factor
    offset = c - c / factor
    return ndimage.affine_transform(img, matrix, offset=offset, order=1, mode="constant", cval=1.0)


def augment_undamaged(img: np.ndarray, params: AugmentationParams) -> np.ndarray:
    """Apply the fixed augmentation chain; output stays 64x64 in [0,1]."""
    out = img.astype(np.float32, copy=False)
    if params.texture_strength > 0.0:
        noise_rng = np.random.default_rng(params.texture_seed)
        noise = value_noise(out.shape, params.texture_cell, noise_rng)
        s = params.texture_strength
        out = np.clip((1.0 - s) * out + s * noise, 0.0, 1.0)
    if params.brightness_shift != 0.0:
        out = np.clip(out + params.brightness_shift, 0.0, 1.0)
    if params.contrast_factor != 1.0:
        out = np.clip((out - 0.5) * params.contrast_factor + 0.5, 0.0, 1.0)
    dx, dy = params.translate
    if dx != 0 or dy != 0:
        out = _translate(out, dx, dy)
    if params.rotate_deg != 0.0:
        out = ndimage.rotate(out, params.rotate_deg, reshape=False, order=1, mode="constant", cval=1.0)
    if params.scale != 1.0:
        out = _scale_about_center(out, params.scale)
    if params.blur_sigma > 0.0:
        out = ndimage.gaussian_filter(out, params.blur_sigma, mode="constant", cval=1.0)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
