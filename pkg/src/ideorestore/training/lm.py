"""Stage-wise language model training on masked-character prediction.

Stage 0 pretrains the compact encoder from scratch when no externally
pretrained model is injected; the finetuning stage continues the same
objective and produces the snapshot that is both the text-only baseline
and the frozen context encoder of the multimodal model.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from ..corpus.segmentation import Sentence
from ..corpus.vocabulary import Vocabulary
from ..model.codec import TokenCodec
from ..model.context_encoder import MaskedLanguageModel
from .batches import iter_epoch_batches
from .losses import predicting_loss

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class LMTrainConfig:
    epochs: int = 5
    batch_size: int = 128
    lr: float = 3e-4
    seed: int = 0
    n_masks: int | str = "random_1_5"
    weight_decay: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@torch.no_grad()
def masked_accuracy(
    lm: MaskedLanguageModel,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    seed: int = 0,
    n_masks: int | str = 1,
    batch_size: int = 256,
) -> float:
    """Top-1 masked-character accuracy under a fixed mask sampling seed."""
    lm.eval()
    hits = 0
    total = 0
    for batch in iter_epoch_batches(sentences, vocab, codec, n_masks, batch_size, seed, 0, shuffle=False):
        logits = lm.logits_at(
            torch.from_numpy(batch.tokens), torch.from_numpy(batch.pad), torch.from_numpy(batch.position_index)
        )
        pred = logits.argmax(dim=-1).numpy()
        hits += int((pred == batch.labels).sum())
        total += batch.n_positions
    if total == 0:
        raise ValueError("no evaluable positions")
    return hits / total


def train_masked_lm(
    lm: MaskedLanguageModel,
    train_sentences: list[Sentence],
    dev_sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    cfg: LMTrainConfig,
    metrics_path: str | Path | None = None,
    epoch_offset: int = 0,
) -> dict:
    """Train in place; returns a history dict with per-epoch dev accuracy.

    ``epoch_offset`` keeps batch seeding distinct when a later stage
    continues from an earlier snapshot.
    """
    opt = torch.optim.Adam(lm.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    history = {"dev_accuracy": [], "train_loss": []}
    log_file = open(metrics_path, "a", encoding="utf-8") if metrics_path else None
    step = 0
    try:
        for epoch in range(1, cfg.epochs + 1):
            lm.train()
            epoch_losses = []
            for batch in iter_epoch_batches(
                train_sentences, vocab, codec, cfg.n_masks, cfg.batch_size, cfg.seed, epoch + epoch_offset
            ):
                logits = lm.logits_at(
                    torch.from_numpy(batch.tokens),
                    torch.from_numpy(batch.pad),
                    torch.from_numpy(batch.position_index),
                )
                loss = predicting_loss(logits, torch.from_numpy(batch.labels))
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(f"loss is not finite at step {step}")
                opt.zero_grad()
                loss.backward()
                opt.step()
                step += 1
                epoch_losses.append(float(loss.detach()))
                if log_file:
                    log_file.write(json.dumps({"step": step, "epoch": epoch, "loss": epoch_losses[-1], "lr": cfg.lr}) + "\n")
            acc = masked_accuracy(lm, dev_sentences, vocab, codec, seed=cfg.seed, n_masks=cfg.n_masks)
            history["dev_accuracy"].append(acc)
            history["train_loss"].append(float(np.mean(epoch_losses)) if epoch_losses else float("nan"))
            logger.info("lm epoch %d: train loss %.4f, dev acc %.4f", epoch, history["train_loss"][-1], acc)
    finally:
        if log_file:
            log_file.close()
    return history


def pretrain_lm(
    train_sentences: list[Sentence],
    dev_sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    lm: MaskedLanguageModel,
    cfg: LMTrainConfig,
    metrics_path: str | Path | None = None,
) -> dict:
    """Stage 0: from-scratch masked-character pretraining."""
    return train_masked_lm(lm, train_sentences, dev_sentences, vocab, codec, cfg, metrics_path)


def finetune_lm(
    train_sentences: list[Sentence],
    dev_sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    lm: MaskedLanguageModel,
    cfg: LMTrainConfig,
    metrics_path: str | Path | None = None,
) -> dict:
    """Continue masked-character training from the pretrained snapshot.

    Returns the history plus before/after dev accuracy so callers can
    verify the finetuned snapshot actually improved.
    """
    before = masked_accuracy(lm, dev_sentences, vocab, codec, seed=cfg.seed, n_masks=cfg.n_masks)
    history = train_masked_lm(
        lm, train_sentences, dev_sentences, vocab, codec, cfg, metrics_path, epoch_offset=1_000_000
    )
    history["dev_accuracy_before"] = before
    history["dev_accuracy_after"] = history["dev_accuracy"][-1] if history["dev_accuracy"] else before
    if history["dev_accuracy_after"] <= before:
        logger.warning(
            "finetuning did not improve dev accuracy (%.4f -> %.4f)", before, history["dev_accuracy_after"]
        )
    return history
