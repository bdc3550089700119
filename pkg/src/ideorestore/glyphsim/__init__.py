from .image import GLYPH_SIZE, from_png_bytes, invert_colors, load_image, save_image, to_png_bytes, validate_glyph
from .render import FontAsset, FontLibrary, GlyphUnavailableError, render_glyph
from .augment import AugmentationParams, AugmentationRanges, augment_undamaged, value_noise
from .damage import (
    CurriculumState,
    DamageRanges,
    DamageSpec,
    RectMask,
    SpotMask,
    apply_damage,
    centered_square_spec,
    effective_rect_dims,
)
from .simulate import GlyphSimulator, NoFontCoverageError, SimulationConfig

__all__ = [
    "GLYPH_SIZE",
    "from_png_bytes",
    "invert_colors",
    "load_image",
    "save_image",
    "to_png_bytes",
    "validate_glyph",
    "FontAsset",
    "FontLibrary",
    "GlyphUnavailableError",
    "render_glyph",
    "AugmentationParams",
    "AugmentationRanges",
    "augment_undamaged",
    "value_noise",
    "CurriculumState",
    "DamageRanges",
    "DamageSpec",
    "RectMask",
    "SpotMask",
    "apply_damage",
    "centered_square_spec",
    "effective_rect_dims",
    "GlyphSimulator",
    "NoFontCoverageError",
    "SimulationConfig",
]
