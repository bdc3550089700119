"""Multimodal multitask training with curriculum-scaled damage.

Per epoch j the simulated damage uses severity min(j/horizon, 1); the
learning rate decays exponentially per epoch from lr0 to lr_final. The
context encoder stays frozen throughout (its checksum is recorded before
and after), images are simulated online each epoch, and the best-dev
snapshot is retained alongside the final one.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..corpus.segmentation import Sentence
from ..corpus.vocabulary import Vocabulary
from ..glyphsim.damage import CurriculumState
from ..glyphsim.simulate import GlyphSimulator
from ..model.baselines import ImageOnlyClassifier
from ..model.codec import TokenCodec
from ..model.restorer import MultimodalRestorer
from .batches import iter_epoch_batches, simulate_batch_images
from .lm import LMTrainConfig, TrainingDivergedError
from .losses import predicting_loss, total_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 100.0
    batch_size: int = 256
    epochs: int = 30
    curriculum_epochs: int = 10
    lr0: float = 1e-4
    lr_final: float = 5e-6
    seed: int = 0
    n_masks: int | str = 1
    workers: int = 1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 1 <= self.curriculum_epochs <= self.epochs:
            raise ValueError("curriculum_epochs must be in [1, epochs]")
        if not self.lr_final < self.lr0:
            raise ValueError("lr_final must be below lr0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    best_state: dict
    final_state: dict
    best_epoch: int
    best_dev_accuracy: float
    history: dict
    checksum_before: str
    checksum_after: str
    metrics_path: Path | None


def context_checksum(model: MultimodalRestorer) -> str:
    """Hash of the context encoder's parameters, in named order."""
    h = hashlib.sha256()
    for name, p in sorted(model.context_encoder.state_dict().items()):
        h.update(name.encode())
        h.update(p.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def epoch_lr(cfg: TrainConfig, epoch: int) -> float:
    """Exponential per-epoch decay from lr0 to lr_final over the run."""
    if cfg.epochs == 1:
        return cfg.lr0
    frac = (epoch - 1) / (cfg.epochs - 1)
    return cfg.lr0 * (cfg.lr_final / cfg.lr0) ** frac


@torch.no_grad()
def restorer_accuracy(
    model: MultimodalRestorer,
    simulator: GlyphSimulator,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    seed: int = 0,
    n_masks: int | str = 1,
    batch_size: int = 256,
) -> float:
    """Top-1 multimodal accuracy with full-severity damage (fixed seed)."""
    model.eval()
    hits = 0
    total = 0
    for batch in iter_epoch_batches(sentences, vocab, codec, n_masks, batch_size, seed, 0, shuffle=False):
        damaged, _, _, keep = simulate_batch_images(batch, simulator)
        if not keep.any():
            continue
        out = model(
            torch.from_numpy(batch.tokens),
            torch.from_numpy(batch.pad),
            torch.from_numpy(batch.position_index[keep]),
            torch.from_numpy(damaged[keep]),
            decode_images=False,
        )
        pred = out["logits"].argmax(dim=-1).numpy()
        hits += int((pred == batch.labels[keep]).sum())
        total += int(keep.sum())
    if total == 0:
        raise ValueError("no evaluable positions")
    return hits / total


def train_restorer(
    model: MultimodalRestorer,
    simulator: GlyphSimulator,
    train_sentences: list[Sentence],
    dev_sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    cfg: TrainConfig,
    out_dir: str | Path | None = None,
) -> TrainResult:
    torch.manual_seed(cfg.seed)
    checksum_before = context_checksum(model)
    opt = torch.optim.Adam(model.trainable_parameters(), lr=cfg.lr0)
    metrics_path = None
    log_file = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_path = out_dir / "metrics.jsonl"
        log_file = open(metrics_path, "w", encoding="utf-8")
    history: dict = {"dev_accuracy": [], "epoch_loss": [], "lr": [], "damaged_fraction": []}
    best_state: dict = {}
    best_acc = -1.0
    best_epoch = 0
    decode_images = cfg.alpha > 0
    step = 0
    try:
        for epoch in range(1, cfg.epochs + 1):
            curriculum = CurriculumState(epoch, cfg.curriculum_epochs)
            lr = epoch_lr(cfg, epoch)
            for group in opt.param_groups:
                group["lr"] = lr
            model.train()
            epoch_losses = []
            changed_px = 0
            total_px = 0
            for batch in iter_epoch_batches(
                train_sentences, vocab, codec, cfg.n_masks, cfg.batch_size, cfg.seed, epoch
            ):
                damaged, undamaged, clean, keep = simulate_batch_images(batch, simulator, curriculum)
                if not keep.any():
                    continue
                imgs = torch.from_numpy(damaged[keep])
                targets = torch.from_numpy(clean[keep])
                out = model(
                    torch.from_numpy(batch.tokens),
                    torch.from_numpy(batch.pad),
                    torch.from_numpy(batch.position_index[keep]),
                    imgs,
                    decode_images=decode_images,
                )
                loss, breakdown = total_loss(
                    out["logits"],
                    torch.from_numpy(batch.labels[keep]),
                    out["restored"],
                    targets if decode_images else None,
                    cfg.alpha,
                )
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(f"loss is not finite at step {step}")
                opt.zero_grad()
                loss.backward()
                opt.step()
                step += 1
                epoch_losses.append(breakdown.total)
                changed_px += int((np.abs(damaged[keep] - undamaged[keep]) > 1e-3).sum())
                total_px += int(damaged[keep].size)
                if log_file:
                    log_file.write(
                        json.dumps(
                            {
                                "step": step,
                                "epoch": epoch,
                                "loss_res": breakdown.restore,
                                "loss_pred": breakdown.predict,
                                "total": breakdown.total,
                                "lr": lr,
                            }
                        )
                        + "\n"
                    )
            acc = restorer_accuracy(
                model, simulator, dev_sentences, vocab, codec, seed=cfg.seed, n_masks=cfg.n_masks
            )
            history["dev_accuracy"].append(acc)
            history["epoch_loss"].append(float(np.mean(epoch_losses)) if epoch_losses else float("nan"))
            history["lr"].append(lr)
            history["damaged_fraction"].append(changed_px / total_px if total_px else 0.0)
            logger.info(
                "epoch %d: loss %.4f, dev acc %.4f, lr %.2e, damage %.3f",
                epoch,
                history["epoch_loss"][-1],
                acc,
                lr,
                history["damaged_fraction"][-1],
            )
            if acc > best_acc:
                best_acc = acc
                best_epoch = epoch
                best_state = copy.deepcopy(model.state_dict())
    finally:
        if log_file:
            log_file.close()
    checksum_after = context_checksum(model)
    if checksum_after != checksum_before:
        raise RuntimeError("frozen context encoder changed during training")
    return TrainResult(
        best_state=best_state or copy.deepcopy(model.state_dict()),
        final_state=copy.deepcopy(model.state_dict()),
        best_epoch=best_epoch,
        best_dev_accuracy=best_acc,
        history=history,
        checksum_before=checksum_before,
        checksum_after=checksum_after,
        metrics_path=metrics_path,
    )


@torch.no_grad()
def image_accuracy(
    model: ImageOnlyClassifier,
    simulator: GlyphSimulator,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    seed: int = 0,
    n_masks: int | str = 1,
    batch_size: int = 256,
) -> float:
    model.eval()
    hits = 0
    total = 0
    for batch in iter_epoch_batches(sentences, vocab, codec, n_masks, batch_size, seed, 0, shuffle=False):
        damaged, _, _, keep = simulate_batch_images(batch, simulator)
        if not keep.any():
            continue
        logits = model(torch.from_numpy(damaged[keep]))
        pred = logits.argmax(dim=-1).numpy()
        hits += int((pred == batch.labels[keep]).sum())
        total += int(keep.sum())
    if total == 0:
        raise ValueError("no evaluable positions")
    return hits / total


def train_image_classifier(
    model: ImageOnlyClassifier,
    simulator: GlyphSimulator,
    train_sentences: list[Sentence],
    dev_sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    cfg: LMTrainConfig,
    metrics_path: str | Path | None = None,
) -> dict:
    """Image-only baseline: classify the damaged glyph, full severity."""
    torch.manual_seed(cfg.seed)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    history = {"dev_accuracy": [], "train_loss": []}
    log_file = open(metrics_path, "a", encoding="utf-8") if metrics_path else None
    step = 0
    try:
        for epoch in range(1, cfg.epochs + 1):
            model.train()
            epoch_losses = []
            for batch in iter_epoch_batches(
                train_sentences, vocab, codec, cfg.n_masks, cfg.batch_size, cfg.seed, epoch
            ):
                damaged, _, _, keep = simulate_batch_images(batch, simulator)
                if not keep.any():
                    continue
                logits = model(torch.from_numpy(damaged[keep]))
                loss = predicting_loss(logits, torch.from_numpy(batch.labels[keep]))
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(f"loss is not finite at step {step}")
                opt.zero_grad()
                loss.backward()
                opt.step()
                step += 1
                epoch_losses.append(float(loss.detach()))
                if log_file:
                    log_file.write(json.dumps({"step": step, "epoch": epoch, "loss": epoch_losses[-1], "lr": cfg.lr}) + "\n")
            acc = image_accuracy(model, simulator, dev_sentences, vocab, codec, seed=cfg.seed, n_masks=cfg.n_masks)
            history["dev_accuracy"].append(acc)
            history["train_loss"].append(float(np.mean(epoch_losses)) if epoch_losses else float("nan"))
            logger.info("img epoch %d: train loss %.4f, dev acc %.4f", epoch, history["train_loss"][-1], acc)
    finally:
        if log_file:
            log_file.close()
    return history


def loss_ratio(metrics_path: str | Path, first_n: int = 100) -> float:
    """Mean predict/restore loss ratio over the first steps.

    A ratio far from alpha*restore ~ predict means alpha should be
    re-tuned for the image scale at hand.
    """
    ratios = []
    with open(metrics_path, "r", encoding="utf-8") as f:
        for line in f:
            rec = json.loads(line)
            if rec.get("loss_res", 0.0) > 0:
                ratios.append(rec["loss_pred"] / rec["loss_res"])
            if len(ratios) >= first_n:
                break
    if not ratios:
        raise ValueError("no steps with a nonzero restore loss")
    return float(np.mean(ratios))
