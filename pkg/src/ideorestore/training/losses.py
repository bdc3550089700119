"""Multitask loss: weighted sum of image reconstruction and character prediction.

total = alpha * mse(restored, clean_font_render) + cross_entropy(logits, label)

alpha defaults to 100 so the two terms stay comparable on 64x64 glyphs;
``loss_ratio`` (trainer module) reports the observed balance for re-tuning
at other image scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F


@dataclass(frozen=True)
class LossBreakdown:
    restore: float
    predict: float
    total: float
    alpha: float

    def __post_init__(self):
        if self.restore < 0 or self.predict < 0:
            raise ValueError("losses must be non-negative")
        expected = self.alpha * self.restore + self.predict
        if abs(self.total - expected) > 1e-6 * max(1.0, abs(expected)):
            raise ValueError(f"total {self.total} != alpha*restore + predict {expected}")


def restoring_loss(restored: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean over all pixels of the squared difference."""
    if restored.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(restored.shape)} vs {tuple(target.shape)}")
    return F.mse_loss(restored, target)


def predicting_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Cross-entropy against label ids, averaged over masked positions."""
    if labels.min().item() < 0 or labels.max().item() >= logits.shape[-1]:
        raise ValueError("label outside vocabulary")
    return F.cross_entropy(logits, labels)


def total_loss(
    logits: torch.Tensor,
    labels: torch.Tensor,
    restored: torch.Tensor | None,
    targets: torch.Tensor | None,
    alpha: float,
) -> tuple[torch.Tensor, LossBreakdown]:
    """Weighted sum; with alpha=0 the reconstruction head is inert (no gradient)."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    pred = predicting_loss(logits, labels)
    res = restoring_loss(restored, targets) if restored is not None and targets is not None else None
    total = pred if (alpha == 0.0 or res is None) else alpha * res + pred
    res_val = 0.0 if res is None else float(res.detach())
    pred_val = float(pred.detach())
    breakdown = LossBreakdown(
        restore=res_val,
        predict=pred_val,
        total=alpha * res_val + pred_val,
        alpha=alpha,
    )
    return total, breakdown
