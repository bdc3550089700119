"""The multimodal multitask restoration model.

One context-encoder pass per sentence produces a memory; for each masked
position the memory feature is fused additively with that position's image
feature, and the fused vector feeds two heads: a text decoder ranking the
vocabulary and a glyph decoder regenerating the clean character image.

The text decoder starts as a copy of the language model's own masked-LM
head and the image projection starts at zero, so before any multimodal
training step the whole model reproduces the finetuned language model's
predictions exactly.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from ..corpus.masking import MaskedSample
from .codec import TokenCodec
from .context_encoder import ContextEncoder, ContextEncoderConfig, MaskedLanguageModel, MaskedLMHead
from .decoders import GlyphDecoder, GlyphDecoderConfig
from .image_encoder import ImageEncoder, ImageEncoderConfig


def fuse(context_feature: torch.Tensor, image_feature: torch.Tensor) -> torch.Tensor:
    """Additive fusion; widths must match."""
    if context_feature.shape[-1] != image_feature.shape[-1]:
        raise ValueError(
            f"feature width mismatch: {context_feature.shape[-1]} vs {image_feature.shape[-1]}"
        )
    return context_feature + image_feature


@dataclass(frozen=True)
class RestorerConfig:
    encoder: ContextEncoderConfig
    image: ImageEncoderConfig
    decoder: GlyphDecoderConfig
    context_frozen: bool = True

    def __post_init__(self):
        if self.image.dim != self.encoder.dim or self.decoder.dim != self.encoder.dim:
            raise ValueError("context, image and decoder feature widths must match")

    def to_dict(self) -> dict:
        return {
            "encoder": self.encoder.to_dict(),
            "image": self.image.to_dict(),
            "decoder": self.decoder.to_dict(),
            "context_frozen": self.context_frozen,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RestorerConfig":
        img = dict(d["image"])
        img["channels"] = tuple(img["channels"])
        return cls(
            encoder=ContextEncoderConfig(**d["encoder"]),
            image=ImageEncoderConfig(**img),
            decoder=GlyphDecoderConfig(**d["decoder"]),
            context_frozen=d.get("context_frozen", True),
        )


@dataclass
class PredictionOutput:
    """Per-position outputs, feature vectors exposed for inspection."""

    logits: np.ndarray
    restored: np.ndarray | None
    fused: np.ndarray
    context_feature: np.ndarray
    image_feature: np.ndarray


class MultimodalRestorer(nn.Module):
    def __init__(self, cfg: RestorerConfig, language_model: MaskedLanguageModel | None = None):
        super().__init__()
        self.cfg = cfg
        if language_model is not None:
            if language_model.cfg != cfg.encoder:
                raise ValueError("language model config does not match restorer encoder config")
            self.context_encoder = copy.deepcopy(language_model.encoder)
            self.text_head = copy.deepcopy(language_model.head)
        else:
            self.context_encoder = ContextEncoder(cfg.encoder)
            self.text_head = MaskedLMHead(cfg.encoder.dim, cfg.encoder.vocab_size)
        self.image_encoder = ImageEncoder(cfg.image)
        self.glyph_decoder = GlyphDecoder(cfg.decoder)
        if cfg.context_frozen:
            self.freeze_context()

    @classmethod
    def from_language_model(
        cls,
        lm: MaskedLanguageModel,
        image_cfg: ImageEncoderConfig | None = None,
        decoder_cfg: GlyphDecoderConfig | None = None,
        context_frozen: bool = True,
    ) -> "MultimodalRestorer":
        cfg = RestorerConfig(
            encoder=lm.cfg,
            image=image_cfg or ImageEncoderConfig(dim=lm.cfg.dim),
            decoder=decoder_cfg or GlyphDecoderConfig(dim=lm.cfg.dim),
            context_frozen=context_frozen,
        )
        return cls(cfg, language_model=lm)

    def freeze_context(self) -> None:
        for p in self.context_encoder.parameters():
            p.requires_grad_(False)
        self.context_encoder.eval()

    def load_image_trunk(self, trunk_state: dict) -> None:
        """Warm-start the visual trunk from a pretrained image classifier.

        The zero-initialized projection on top stays zero, so the model
        still reproduces the language model exactly before the first
        multimodal step; training then only has to learn the projection
        and refine the trunk instead of growing features from scratch.
        """
        self.image_encoder.trunk.load_state_dict(trunk_state)

    def train(self, mode: bool = True) -> "MultimodalRestorer":
        super().train(mode)
        if self.cfg.context_frozen:
            self.context_encoder.eval()
        return self

    def trainable_parameters(self):
        return (p for p in self.parameters() if p.requires_grad)

    def forward(
        self,
        tokens: torch.Tensor,
        pad_mask: torch.Tensor | None,
        position_index: torch.Tensor,
        images: torch.Tensor | None,
        decode_images: bool = True,
    ) -> dict[str, torch.Tensor | None]:
        """One encoder pass for the batch, then per-position fusion and decoding.

        position_index is (N,2) int64 rows of (sample, position); images is
        (N,1,64,64) aligned with it, or None for the text-only path.
        """
        if images is not None and images.shape[0] != position_index.shape[0]:
            raise ValueError(
                f"{position_index.shape[0]} masked positions but {images.shape[0]} images"
            )
        if self.cfg.context_frozen:
            with torch.no_grad():
                memory = self.context_encoder(tokens, pad_mask)
        else:
            memory = self.context_encoder(tokens, pad_mask)
        context_feature = memory[position_index[:, 0], position_index[:, 1]]
        if images is None:
            image_feature = torch.zeros_like(context_feature)
        else:
            image_feature = self.image_encoder(images)
        fused = fuse(context_feature, image_feature)
        logits = self.text_head(fused)
        restored = self.glyph_decoder(fused) if decode_images else None
        return {
            "logits": logits,
            "restored": restored,
            "fused": fused,
            "context_feature": context_feature,
            "image_feature": image_feature,
        }

    @torch.no_grad()
    def predict_sample(
        self,
        codec: TokenCodec,
        sample: MaskedSample,
        images: list[np.ndarray] | None,
        decode_images: bool = True,
    ) -> list[PredictionOutput]:
        """Eval-mode prediction for one masked sentence."""
        if images is not None and len(images) != len(sample.masked_positions):
            raise ValueError(
                f"{len(sample.masked_positions)} masked positions but {len(images)} images"
            )
        self.eval()
        tokens = torch.from_numpy(codec.encode(sample.context)).unsqueeze(0)
        index = torch.tensor([[0, p] for p in sample.masked_positions], dtype=torch.int64)
        if images is None:
            imgs = None
        else:
            imgs = torch.from_numpy(np.stack(images).astype(np.float32)).unsqueeze(1)
        out = self.forward(tokens, None, index, imgs, decode_images=decode_images)
        results = []
        for i in range(len(sample.masked_positions)):
            restored = out["restored"][i, 0].numpy() if out["restored"] is not None else None
            results.append(
                PredictionOutput(
                    logits=out["logits"][i].numpy(),
                    restored=restored,
                    fused=out["fused"][i].numpy(),
                    context_feature=out["context_feature"][i].numpy(),
                    image_feature=out["image_feature"][i].numpy(),
                )
            )
        return results
