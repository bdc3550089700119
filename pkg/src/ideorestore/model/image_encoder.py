"""Residual convolutional image encoder with a zero-initialized projection.

The final linear layer (weight and bias both zero at construction) maps
the trunk feature to the context encoder's width, so the visual feature
starts as an exact no-op under additive fusion and its influence grows
only through training.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn

from ..glyphsim.image import GLYPH_SIZE


@dataclass(frozen=True)
class ImageEncoderConfig:
    dim: int = 128
    channels: tuple[int, ...] = (16, 32, 64, 128)
    groups: int = 4

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channels"] = list(self.channels)
        return d


def _gn(groups: int, channels: int) -> nn.GroupNorm:
    g = max(g for g in range(1, groups + 1) if channels % g == 0)
    return nn.GroupNorm(g, channels)


class ResidualBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int, stride: int, groups: int):
        super().__init__()
        self.conv1 = nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1, bias=False)
        self.norm1 = _gn(groups, c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1, bias=False)
        self.norm2 = _gn(groups, c_out)
        self.act = nn.ReLU(inplace=True)
        if stride != 1 or c_in != c_out:
            self.skip = nn.Sequential(nn.Conv2d(c_in, c_out, 1, stride=stride, bias=False), _gn(groups, c_out))
        else:
            self.skip = nn.Identity()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.act(self.norm1(self.conv1(x)))
        h = self.norm2(self.conv2(h))
        return self.act(h + self.skip(x))


class ImageTrunk(nn.Module):
    """Stack of stride-2 residual blocks ending in a pooled feature vector."""

    def __init__(self, cfg: ImageEncoderConfig):
        super().__init__()
        self.cfg = cfg
        c0 = cfg.channels[0]
        self.stem = nn.Sequential(nn.Conv2d(1, c0, 3, padding=1, bias=False), _gn(cfg.groups, c0), nn.ReLU(inplace=True))
        blocks = []
        c_prev = c0
        for c in cfg.channels:
            blocks.append(ResidualBlock(c_prev, c, stride=2, groups=cfg.groups))
            c_prev = c
        self.blocks = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.out_channels = c_prev

    def forward(self, imgs: torch.Tensor) -> torch.Tensor:
        if imgs.dim() != 4 or imgs.shape[1] != 1 or imgs.shape[2] != GLYPH_SIZE or imgs.shape[3] != GLYPH_SIZE:
            raise ValueError(f"expected (B,1,{GLYPH_SIZE},{GLYPH_SIZE}) images, got {tuple(imgs.shape)}")
        h = self.blocks(self.stem(imgs))
        return self.pool(h).flatten(1)


class ImageEncoder(nn.Module):
    def __init__(self, cfg: ImageEncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.trunk = ImageTrunk(cfg)
        self.proj = nn.Linear(self.trunk.out_channels, cfg.dim)
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)

    def forward(self, imgs: torch.Tensor) -> torch.Tensor:
        return self.proj(self.trunk(imgs))
