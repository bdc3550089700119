"""Damage mask simulation with curriculum-scaled severity.

Two damage kinds mirror what real artefacts show: additive damage writes
intensities near 0 (close in color to the ink, like pitting on rubbings)
and fading damage writes intensities near 1 (close to the background, like
worn ink). A sample gets one large rotated-rectangle mask plus a random
number of soft-edged disk spots. During the curriculum phase the large
mask's length and width are multiplied by min(epoch/horizon, 1); spots are
unscaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .image import GLYPH_SIZE

ADDITIVE = "additive"
FADING = "fading"

_ADDITIVE_FILL_MAX = 0.3
_FADING_FILL_MIN = 0.7


def _check_kind_fill(kind: str, fill: float) -> None:
    if kind == ADDITIVE:
        if not 0.0 <= fill <= _ADDITIVE_FILL_MAX:
            raise ValueError(f"additive fill {fill} not near 0 (must be <= {_ADDITIVE_FILL_MAX})")
    elif kind == FADING:
        if not _FADING_FILL_MIN <= fill <= 1.0:
            raise ValueError(f"fading fill {fill} not near 1 (must be >= {_FADING_FILL_MIN})")
    else:
        raise ValueError(f"unknown damage kind {kind!r}")


@dataclass(frozen=True)
class RectMask:
    """Rotated rectangle: length along the angle direction, width across it."""

    length: float
    width: float
    center: tuple[float, float] = (GLYPH_SIZE / 2, GLYPH_SIZE / 2)  # (x, y)
    angle_deg: float = 0.0
    kind: str = ADDITIVE
    fill: float = 0.05

    def __post_init__(self):
        _check_kind_fill(self.kind, self.fill)
        if self.length < 0 or self.width < 0:
            raise ValueError("rectangle dims must be non-negative")


@dataclass(frozen=True)
class SpotMask:
    radius: float
    center: tuple[float, float]
    kind: str = ADDITIVE
    fill: float = 0.05

    def __post_init__(self):
        _check_kind_fill(self.kind, self.fill)
        if self.radius < 0:
            raise ValueError("spot radius must be non-negative")


@dataclass(frozen=True)
class DamageSpec:
    large_mask: RectMask | None = None
    spots: tuple[SpotMask, ...] = ()
    edge_softness: float = 1.5
    noise_amp: float = 0.04
    noise_seed: int = 0

    @classmethod
    def none(cls) -> "DamageSpec":
        return cls(large_mask=None, spots=())


@dataclass(frozen=True)
class CurriculumState:
    """Epoch-dependent severity: scale = min(epoch/horizon, 1)."""

    epoch: int = 1
    horizon: int = 1

    def __post_init__(self):
        if self.epoch < 1 or self.horizon < 1:
            raise ValueError("epoch and horizon must be >= 1")

    @property
    def scale(self) -> float:
        return min(self.epoch / self.horizon, 1.0)


FULL_SEVERITY = CurriculumState(1, 1)


def effective_rect_dims(rect: RectMask, curriculum: CurriculumState) -> tuple[float, float]:
    """Large-mask dims after curriculum scaling."""
    s = curriculum.scale
    return rect.length * s, rect.width * s


_GRID_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _grid(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    if shape not in _GRID_CACHE:
        ys, xs = np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)
        _GRID_CACHE[shape] = (ys, xs)
    return _GRID_CACHE[shape]


def _rect_alpha(shape: tuple[int, int], rect: RectMask, length: float, width: float, softness: float) -> np.ndarray:
    ys, xs = _grid(shape)
    cx, cy = rect.center
    theta = math.radians(rect.angle_deg)
    dx = xs - cx
    dy = ys - cy
    u = dx * math.cos(theta) + dy * math.sin(theta)
    v = -dx * math.sin(theta) + dy * math.cos(theta)
    # signed depth inside the rectangle boundary, positive inside
    inside = np.minimum(length / 2 - np.abs(u), width / 2 - np.abs(v))
    if softness <= 0:
        return (inside >= 0).astype(np.float32)
    return np.clip(inside / softness + 0.5, 0.0, 1.0).astype(np.float32)


def _disk_alpha(shape: tuple[int, int], spot: SpotMask, softness: float) -> np.ndarray:
    ys, xs = _grid(shape)
    cx, cy = spot.center
    dist = np.hypot(xs - cx, ys - cy)
    inside = spot.radius - dist
    if softness <= 0:
        return (inside >= 0).astype(np.float32)
    return np.clip(inside / softness + 0.5, 0.0, 1.0).astype(np.float32)


def _apply_mask(img: np.ndarray, alpha: np.ndarray, kind: str, fill: float, noise: np.ndarray) -> np.ndarray:
    fill_pix = np.clip(fill + noise, 0.0, 1.0)
    blend = img * (1.0 - alpha) + fill_pix * alpha
    # additive masks may only darken, fading masks may only lighten
    if kind == ADDITIVE:
        return np.minimum(img, blend)
    return np.maximum(img, blend)


def apply_damage(
    img: np.ndarray,
    spec: DamageSpec,
    curriculum: CurriculumState = FULL_SEVERITY,
) -> np.ndarray:
    """Draw the spec's masks onto a copy of the image."""
    out = img.astype(np.float32, copy=True)
    noise_rng = np.random.default_rng(spec.noise_seed)
    if spec.large_mask is not None:
        length, width = effective_rect_dims(spec.large_mask, curriculum)
        if length > 0 and width > 0:
            alpha = _rect_alpha(out.shape, spec.large_mask, length, width, spec.edge_softness)
            noise = (noise_rng.random(out.shape).astype(np.float32) - 0.5) * 2.0 * spec.noise_amp
            out = _apply_mask(out, alpha, spec.large_mask.kind, spec.large_mask.fill, noise)
    for spot in spec.spots:
        if spot.radius <= 0:
            continue
        alpha = _disk_alpha(out.shape, spot, spec.edge_softness)
        noise = (noise_rng.random(out.shape).astype(np.float32) - 0.5) * 2.0 * spec.noise_amp
        out = _apply_mask(out, alpha, spot.kind, spot.fill, noise)
    return np.clip(out, 0.0, 1.0)


def centered_square_spec(fraction: float, size: int = GLYPH_SIZE, kind: str = ADDITIVE) -> DamageSpec:
    """Deterministic centered square covering ``fraction`` of the side length.

    Used by the mask-area sweep in place of randomized damage.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0,1]")
    side = fraction * size
    fill = 0.05 if kind == ADDITIVE else 0.95
    rect = RectMask(length=side, width=side, center=(size / 2, size / 2), angle_deg=0.0, kind=kind, fill=fill)
    return DamageSpec(large_mask=rect, spots=(), noise_amp=0.0)


@dataclass(frozen=True)
class DamageRanges:
    """Configured ranges damage specs are drawn from."""

    rect_length: tuple[float, float] = (0.2 * GLYPH_SIZE, 0.9 * GLYPH_SIZE)
    rect_width: tuple[float, float] = (0.2 * GLYPH_SIZE, 0.9 * GLYPH_SIZE)
    rect_angle: tuple[float, float] = (0.0, 180.0)
    center_jitter: float = 8.0  # px around the image center
    n_spots: tuple[int, int] = (0, 8)
    spot_radius: tuple[float, float] = (1.0, 6.0)
    additive_fill: tuple[float, float] = (0.0, 0.2)
    fading_fill: tuple[float, float] = (0.8, 1.0)
    additive_prob: float = 0.5
    edge_softness: float = 1.5
    noise_amp: float = 0.04

    @classmethod
    def none(cls) -> "DamageRanges":
        return cls(
            rect_length=(0.0, 0.0),
            rect_width=(0.0, 0.0),
            center_jitter=0.0,
            n_spots=(0, 0),
            spot_radius=(0.0, 0.0),
        )

    def _kind_fill(self, rng: np.random.Generator) -> tuple[str, float]:
        if rng.random() < self.additive_prob:
            return ADDITIVE, float(rng.uniform(*self.additive_fill))
        return FADING, float(rng.uniform(*self.fading_fill))

    def sample(self, rng: np.random.Generator, size: int = GLYPH_SIZE) -> DamageSpec:
        c = size / 2
        kind, fill = self._kind_fill(rng)
        rect = RectMask(
            length=float(rng.uniform(*self.rect_length)),
            width=float(rng.uniform(*self.rect_width)),
            center=(
                float(c + rng.uniform(-self.center_jitter, self.center_jitter)),
                float(c + rng.uniform(-self.center_jitter, self.center_jitter)),
            ),
            angle_deg=float(rng.uniform(*self.rect_angle)),
            kind=kind,
            fill=fill,
        )
        spots = []
        for _ in range(int(rng.integers(self.n_spots[0], self.n_spots[1] + 1))):
            kind, fill = self._kind_fill(rng)
            spots.append(
                SpotMask(
                    radius=float(rng.uniform(*self.spot_radius)),
                    center=(float(rng.uniform(0, size)), float(rng.uniform(0, size))),
                    kind=kind,
                    fill=fill,
                )
            )
        return DamageSpec(
            large_mask=rect,
            spots=tuple(spots),
            edge_softness=self.edge_softness,
            noise_amp=self.noise_amp,
            noise_seed=int(rng.integers(0, 2**31 - 1)),
        )
