"""Transposed-convolution glyph decoder.

A fused feature vector is lifted to a 2x2 spatial seed and upsampled
through exactly five stride-2 transposed convolutions (2->4->8->16->32->64),
channel width halving per stage down to a single channel, with a final
sigmoid squashing intensities into [0,1].
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn

N_STAGES = 5
SEED_SPATIAL = 2


@dataclass(frozen=True)
class GlyphDecoderConfig:
    dim: int = 128
    base_channels: int = 128  # width of the 2x2 seed; halves per stage
    groups: int = 4

    def to_dict(self) -> dict:
        return asdict(self)


class GlyphDecoder(nn.Module):
    def __init__(self, cfg: GlyphDecoderConfig):
        super().__init__()
        self.cfg = cfg
        widths = [max(cfg.base_channels >> i, 4) for i in range(N_STAGES)] + [1]
        self.fc = nn.Linear(cfg.dim, widths[0] * SEED_SPATIAL * SEED_SPATIAL)
        stages = []
        for i in range(N_STAGES):
            stages.append(nn.ConvTranspose2d(widths[i], widths[i + 1], kernel_size=4, stride=2, padding=1))
            if i < N_STAGES - 1:
                groups = max(g for g in range(1, cfg.groups + 1) if widths[i + 1] % g == 0)
                stages.append(nn.GroupNorm(groups, widths[i + 1]))
                stages.append(nn.ReLU(inplace=True))
        self.stages = nn.Sequential(*stages)
        self.squash = nn.Sigmoid()
        self._seed_channels = widths[0]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B,dim) -> (B,1,64,64) in [0,1]."""
        h = self.fc(x).view(-1, self._seed_channels, SEED_SPATIAL, SEED_SPATIAL)
        return self.squash(self.stages(h))
