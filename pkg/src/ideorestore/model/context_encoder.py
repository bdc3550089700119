"""Compact bidirectional transformer used as the context encoder.

Any pretrained masked language model satisfying this interface (a
per-position feature map plus a masked-LM head over the same vocabulary)
can be injected in its place; desk-scale runs train this one from scratch.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn

from .codec import MASK_ID


class PositionNotMaskedError(ValueError):
    pass


@dataclass(frozen=True)
class ContextEncoderConfig:
    vocab_size: int
    dim: int = 128
    layers: int = 4
    heads: int = 4
    ffn_dim: int = 512
    max_len: int = 52
    dropout: float = 0.1

    def to_dict(self) -> dict:
        return asdict(self)


class ContextEncoder(nn.Module):
    def __init__(self, cfg: ContextEncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.token_emb = nn.Embedding(cfg.vocab_size, cfg.dim)
        self.pos_emb = nn.Embedding(cfg.max_len, cfg.dim)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.dim,
            nhead=cfg.heads,
            dim_feedforward=cfg.ffn_dim,
            dropout=cfg.dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=cfg.layers, enable_nested_tensor=False)
        self.norm = nn.LayerNorm(cfg.dim)

    def forward(self, tokens: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        """tokens (B,L) int64, pad_mask (B,L) bool True at padding -> memory (B,L,D)."""
        b, length = tokens.shape
        if length > self.cfg.max_len:
            raise ValueError(f"sequence length {length} exceeds max_len {self.cfg.max_len}")
        pos = torch.arange(length, device=tokens.device).unsqueeze(0).expand(b, length)
        h = self.token_emb(tokens) + self.pos_emb(pos)
        h = self.encoder(h, src_key_padding_mask=pad_mask)
        return self.norm(h)


class MaskedLMHead(nn.Module):
    """Feature -> vocabulary logits: dense, GELU, LayerNorm, output projection."""

    def __init__(self, dim: int, vocab_size: int):
        super().__init__()
        self.dense = nn.Linear(dim, dim)
        self.act = nn.GELU()
        self.norm = nn.LayerNorm(dim)
        self.out = nn.Linear(dim, vocab_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.out(self.norm(self.act(self.dense(x))))


class MaskedLanguageModel(nn.Module):
    """Context encoder plus its own masked-LM head (the text-only predictor)."""

    def __init__(self, cfg: ContextEncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = ContextEncoder(cfg)
        self.head = MaskedLMHead(cfg.dim, cfg.vocab_size)

    def forward(self, tokens: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        return self.encoder(tokens, pad_mask)

    def logits_at(
        self,
        tokens: torch.Tensor,
        pad_mask: torch.Tensor | None,
        position_index: torch.Tensor,
    ) -> torch.Tensor:
        """Logits at the (sample, position) pairs in position_index (N,2)."""
        memory = self.encoder(tokens, pad_mask)
        feats = memory[position_index[:, 0], position_index[:, 1]]
        return self.head(feats)


def encode_context(
    encoder: ContextEncoder,
    tokens: torch.Tensor,
    pad_mask: torch.Tensor | None,
    position: int,
    sample: int = 0,
) -> torch.Tensor:
    """Feature vector of one masked position; the position must hold the mask token."""
    if tokens[sample, position].item() != MASK_ID:
        raise PositionNotMaskedError(f"position {position} not a mask")
    memory = encoder(tokens, pad_mask)
    return memory[sample, position]
