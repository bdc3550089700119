"""Single-modality baselines sharing the restorer's vocabulary.

The text-only baseline is the (finetuned) masked language model itself;
the image-only baseline classifies the damaged glyph directly with the
same convolutional trunk the restorer uses.
"""

from __future__ import annotations

import torch
from torch import nn

from .image_encoder import ImageEncoderConfig, ImageTrunk


class ImageOnlyClassifier(nn.Module):
    def __init__(self, cfg: ImageEncoderConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.trunk = ImageTrunk(cfg)
        self.head = nn.Linear(self.trunk.out_channels, vocab_size)

    def forward(self, imgs: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(imgs))
