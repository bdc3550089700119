"""Font loading and glyph rasterization.

Fonts are standard outline files (.ttf/.otf) in a configured directory.
Rendering produces a near-binary dark-on-light image with the glyph
centered inside a configured margin; it doubles as the clean multitask
reconstruction target.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from .image import GLYPH_SIZE

_MEASURE_SIZE = 48


class GlyphUnavailableError(KeyError):
    pass


class FontAsset:
    """One outline font file plus its codepoint coverage."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.name = self.path.stem
        with TTFont(str(self.path), lazy=True) as tt:
            cmap = tt.getBestCmap()
            self.codepoints = frozenset(cmap.keys()) if cmap else frozenset()
        self._sized: dict[int, ImageFont.FreeTypeFont] = {}

    def covers(self, char: str) -> bool:
        return ord(char) in self.codepoints

    def at_size(self, px: int) -> ImageFont.FreeTypeFont:
        if px not in self._sized:
            self._sized[px] = ImageFont.truetype(str(self.path), px)
        return self._sized[px]

    def __repr__(self):
        return f"FontAsset({self.name})"


class FontLibrary:
    """Read-only set of fonts loaded from a directory."""

    def __init__(self, fonts: list[FontAsset]):
        if not fonts:
            raise ValueError("font library is empty")
        self.fonts = sorted(fonts, key=lambda f: f.name)

    @classmethod
    def from_dir(cls, directory: str | Path) -> "FontLibrary":
        directory = Path(directory)
        paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in (".ttf", ".otf"))
        if not paths:
            raise ValueError(f"no font files in {directory}")
        return cls([FontAsset(p) for p in paths])

    def __len__(self):
        return len(self.fonts)

    def fonts_for(self, char: str) -> list[FontAsset]:
        return [f for f in self.fonts if f.covers(char)]

    def common_codepoints(self) -> frozenset[int]:
        cps = self.fonts[0].codepoints
        for f in self.fonts[1:]:
            cps = cps & f.codepoints
        return cps


def render_glyph(char: str, font: FontAsset, size: int = GLYPH_SIZE, margin: int = 6) -> np.ndarray:
    """Rasterize one character centered in a size x size dark-on-light image.

    Raises GlyphUnavailableError when the font's cmap lacks the codepoint;
    callers fall back to another font from the set. Characters with an
    empty outline (spaces and the like) give an all-background image.
    """
    if len(char) != 1:
        raise ValueError("render_glyph takes a single character")
    if not font.covers(char):
        raise GlyphUnavailableError(f"glyph unavailable: {char!r} not in font {font.name}")
    box = size - 2 * margin
    if box < 1:
        raise ValueError("margin leaves no room for the glyph")
    ref = font.at_size(_MEASURE_SIZE)
    x0, y0, x1, y1 = ref.getbbox(char)
    w, h = x1 - x0, y1 - y0
    if w <= 0 or h <= 0:
        return np.ones((size, size), dtype=np.float32)
    px = max(1, int(_MEASURE_SIZE * box / max(w, h)))
    ft = font.at_size(px)
    x0, y0, x1, y1 = ft.getbbox(char)
    w, h = x1 - x0, y1 - y0
    canvas = Image.new("L", (size, size), 255)
    draw = ImageDraw.Draw(canvas)
    draw.text(((size - w) / 2 - x0, (size - h) / 2 - y0), char, font=ft, fill=0)
    return np.asarray(canvas, dtype=np.float32) / 255.0
