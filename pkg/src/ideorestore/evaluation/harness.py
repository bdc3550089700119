"""Evaluation protocols: resampled reports, multi-mask table, mask-area sweep.

Damage is random, so a single pass over the test split underestimates the
variance; the standard protocol re-samples mask positions and damage a
configurable number of times (30 by default) and reports mean and standard
deviation across resamples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..corpus.segmentation import Sentence
from ..corpus.vocabulary import Vocabulary
from ..glyphsim.damage import FULL_SEVERITY, CurriculumState, DamageSpec, centered_square_spec
from ..glyphsim.simulate import GlyphSimulator, NoFontCoverageError
from ..model.baselines import ImageOnlyClassifier
from ..model.codec import TokenCodec
from ..model.context_encoder import MaskedLanguageModel
from ..model.restorer import MultimodalRestorer
from ..training.batches import MaskedBatch, iter_epoch_batches, simulate_batch_images
from .metrics import MetricSummary, rank_positions, rank_to_metrics

_METRIC_KEYS = ("accuracy", "hits5", "hits10", "hits20", "mrr")


class RestorerPredictor:
    """Multimodal: context plus the damaged image at each position."""

    needs_images = True

    def __init__(self, model: MultimodalRestorer):
        self.model = model

    @torch.no_grad()
    def scores(self, batch: MaskedBatch, images: np.ndarray | None, keep: np.ndarray) -> np.ndarray:
        self.model.eval()
        out = self.model(
            torch.from_numpy(batch.tokens),
            torch.from_numpy(batch.pad),
            torch.from_numpy(batch.position_index[keep]),
            torch.from_numpy(images[keep]),
            decode_images=False,
        )
        return out["logits"].numpy()


class TextOnlyPredictor:
    """Language model only; ignores images."""

    needs_images = False

    def __init__(self, lm: MaskedLanguageModel):
        self.lm = lm

    @torch.no_grad()
    def scores(self, batch: MaskedBatch, images: np.ndarray | None, keep: np.ndarray) -> np.ndarray:
        self.lm.eval()
        logits = self.lm.logits_at(
            torch.from_numpy(batch.tokens),
            torch.from_numpy(batch.pad),
            torch.from_numpy(batch.position_index[keep]),
        )
        return logits.numpy()


class ImageOnlyPredictor:
    """Damaged-image classifier; ignores context."""

    needs_images = True

    def __init__(self, clf: ImageOnlyClassifier):
        self.clf = clf

    @torch.no_grad()
    def scores(self, batch: MaskedBatch, images: np.ndarray | None, keep: np.ndarray) -> np.ndarray:
        self.clf.eval()
        return self.clf(torch.from_numpy(images[keep])).numpy()


@dataclass
class EvalReport:
    mean: MetricSummary
    std: dict[str, float]
    n_samples: int
    n_resamples: int
    per_mask_count: dict[int, MetricSummary]
    per_resample: list[MetricSummary] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "mean": self.mean.as_dict(),
            "std": dict(self.std),
            "n_samples": self.n_samples,
            "n_resamples": self.n_resamples,
            "per_mask_count": {str(k): v.as_dict() for k, v in sorted(self.per_mask_count.items())},
        }


def evaluate(
    predictor,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    simulator: GlyphSimulator | None = None,
    n_masks: int | str = 1,
    resamples: int = 30,
    seed: int = 0,
    batch_size: int = 256,
    damage_spec: DamageSpec | None = None,
    curriculum: CurriculumState = FULL_SEVERITY,
) -> EvalReport:
    """Resampled evaluation: fresh mask positions and fresh damage per pass.

    ``damage_spec`` overrides the randomized damage stage (used by the
    mask-area sweep).
    """
    if not sentences:
        raise ValueError("empty evaluation split")
    if predictor.needs_images and simulator is None:
        raise ValueError("this predictor needs a glyph simulator")
    per_resample: list[MetricSummary] = []
    pooled_by_count: dict[int, list[int]] = {}
    n_positions = 0
    for r in range(resamples):
        ranks: list[int] = []
        for batch in iter_epoch_batches(sentences, vocab, codec, n_masks, batch_size, seed, r, shuffle=False):
            if predictor.needs_images:
                damaged, keep = _simulate_for_eval(batch, simulator, damage_spec, curriculum)
                if not keep.any():
                    continue
                scores = predictor.scores(batch, damaged, keep)
            else:
                keep = np.ones(batch.n_positions, dtype=bool)
                scores = predictor.scores(batch, None, keep)
            batch_ranks = rank_positions(scores, batch.labels[keep], codec.candidate_ids)
            ranks.extend(int(x) for x in batch_ranks)
            counts = np.repeat(
                [len(s.masked_positions) for s in batch.samples],
                [len(s.masked_positions) for s in batch.samples],
            )
            for c, rk in zip(counts[keep], batch_ranks):
                pooled_by_count.setdefault(int(c), []).append(int(rk))
        if not ranks:
            raise ValueError("no evaluable positions in the split")
        per_resample.append(rank_to_metrics(ranks))
        n_positions = len(ranks)
    mean = MetricSummary(**{k: float(np.mean([getattr(m, k) for m in per_resample])) for k in _METRIC_KEYS})
    std = {k: float(np.std([getattr(m, k) for m in per_resample])) for k in _METRIC_KEYS}
    per_count = {c: rank_to_metrics(rs) for c, rs in pooled_by_count.items()}
    return EvalReport(
        mean=mean,
        std=std,
        n_samples=n_positions,
        n_resamples=resamples,
        per_mask_count=per_count,
        per_resample=per_resample,
    )


def _simulate_for_eval(
    batch: MaskedBatch,
    simulator: GlyphSimulator,
    damage_spec: DamageSpec | None,
    curriculum: CurriculumState,
):
    if damage_spec is None:
        damaged, _, _, keep = simulate_batch_images(batch, simulator, curriculum)
        return damaged, keep
    n = batch.n_positions
    size = simulator.config.size
    damaged = np.zeros((n, 1, size, size), dtype=np.float32)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        row = int(batch.position_index[i, 0])
        try:
            d, _ = simulator.simulate(batch.glyph_chars[i], curriculum, batch.rngs[row], damage_spec=damage_spec)
        except NoFontCoverageError:
            keep[i] = False
            continue
        damaged[i, 0] = d
    return damaged, keep


MULTI_MASK_ROWS: tuple[tuple[str, int | str], ...] = (
    ("R", "random_1_5"),
    ("1", 1),
    ("2", 2),
    ("3", 3),
    ("4", 4),
    ("5", 5),
)


def multi_mask_table(
    predictor,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    simulator: GlyphSimulator | None,
    resamples: int = 30,
    seed: int = 0,
    batch_size: int = 256,
) -> dict[str, EvalReport]:
    """One evaluate call per mask-count row: random 1-5 plus fixed 1..5."""
    table = {}
    for name, n_masks in MULTI_MASK_ROWS:
        table[name] = evaluate(
            predictor,
            sentences,
            vocab,
            codec,
            simulator,
            n_masks=n_masks,
            resamples=resamples,
            seed=seed,
            batch_size=batch_size,
        )
    return table


@dataclass
class SweepResult:
    points: list[tuple[float, float]]  # (side fraction, accuracy)
    lm_reference: float

    def as_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "lm_reference": self.lm_reference}


def mask_area_sweep(
    predictor,
    lm_predictor,
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    simulator: GlyphSimulator,
    fractions: tuple[float, ...] = tuple(i / 10 for i in range(11)),
    resamples: int = 3,
    seed: int = 0,
    batch_size: int = 256,
) -> SweepResult:
    """Centered-square damage of growing side fraction vs the text-only line."""
    points = []
    for frac in fractions:
        report = evaluate(
            predictor,
            sentences,
            vocab,
            codec,
            simulator,
            n_masks=1,
            resamples=resamples,
            seed=seed,
            batch_size=batch_size,
            damage_spec=centered_square_spec(frac, size=simulator.config.size),
        )
        points.append((float(frac), report.mean.accuracy))
    lm_report = evaluate(
        lm_predictor, sentences, vocab, codec, None, n_masks=1, resamples=1, seed=seed, batch_size=batch_size
    )
    return SweepResult(points=points, lm_reference=lm_report.mean.accuracy)


def write_report_jsonl(reports: dict[str, EvalReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for name, report in reports.items():
            f.write(json.dumps({"name": name, **report.as_dict()}) + "\n")


def format_report_table(reports: dict[str, EvalReport]) -> str:
    """Human-readable table, values x100 with two decimals."""
    lines = ["Model\tAcc\tHit 5\tHit 10\tHit 20\tMRR"]
    for name, report in reports.items():
        lines.append(f"{name}\t{report.mean.format_row()}")
    return "\n".join(lines) + "\n"
