"""End-to-end simulation of (damaged image, clean target) training pairs.

Three stages: render a clean font image, augment it to look like a
photographed undamaged character, then draw damage masks. The clean
pre-augmentation render in the sample's own font is the reconstruction
target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .augment import AugmentationRanges, augment_undamaged
from .damage import FULL_SEVERITY, CurriculumState, DamageRanges, DamageSpec, apply_damage
from .image import GLYPH_SIZE
from .render import FontLibrary, render_glyph


class NoFontCoverageError(KeyError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    augment: AugmentationRanges = field(default_factory=AugmentationRanges)
    damage: DamageRanges = field(default_factory=DamageRanges)
    size: int = GLYPH_SIZE
    margin: int = 6

    @classmethod
    def none(cls) -> "SimulationConfig":
        """Identity pipeline: damaged output equals the clean render."""
        return cls(augment=AugmentationRanges.none(), damage=DamageRanges.none())

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        aug = AugmentationRanges(**{k: _tupled(v) for k, v in d.get("augment", {}).items()})
        dmg = DamageRanges(**{k: _tupled(v) for k, v in d.get("damage", {}).items()})
        return cls(augment=aug, damage=dmg, size=d.get("size", GLYPH_SIZE), margin=d.get("margin", 6))

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SimulationConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(yaml.safe_load(f) or {})


def _tupled(v):
    return tuple(v) if isinstance(v, list) else v


class GlyphSimulator:
    """Shared read-only fonts plus a render cache; per-call random sources."""

    def __init__(self, fonts: FontLibrary, config: SimulationConfig | None = None):
        self.fonts = fonts
        self.config = config or SimulationConfig()
        self._render_cache: dict[tuple[str, str], np.ndarray] = {}

    def render_clean(self, char: str, font) -> np.ndarray:
        key = (char, font.name)
        img = self._render_cache.get(key)
        if img is None:
            img = render_glyph(char, font, size=self.config.size, margin=self.config.margin)
            self._render_cache[key] = img
        return img

    def can_render(self, char: str) -> bool:
        return bool(self.fonts.fonts_for(char))

    def simulate(
        self,
        char: str,
        curriculum: CurriculumState = FULL_SEVERITY,
        rng: np.random.Generator | None = None,
        damage_spec: DamageSpec | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Return (damaged, clean_target), both from one randomly chosen font.

        ``damage_spec`` overrides the randomized damage stage (the
        augmentation stage still runs); used by the mask-area sweep.
        """
        damaged, _, clean = self.simulate_stages(char, curriculum, rng, damage_spec)
        return damaged, clean

    def simulate_stages(
        self,
        char: str,
        curriculum: CurriculumState = FULL_SEVERITY,
        rng: np.random.Generator | None = None,
        damage_spec: DamageSpec | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Like simulate, but also exposes the undamaged (post-augmentation) stage."""
        if rng is None:
            rng = np.random.default_rng()
        usable = self.fonts.fonts_for(char)
        if not usable:
            raise NoFontCoverageError(f"no font coverage for {char!r}")
        font = usable[int(rng.integers(len(usable)))]
        clean = self.render_clean(char, font)
        params = self.config.augment.sample(rng)
        undamaged = augment_undamaged(clean, params)
        spec = damage_spec if damage_spec is not None else self.config.damage.sample(rng, self.config.size)
        damaged = apply_damage(undamaged, spec, curriculum)
        return damaged, undamaged, clean
