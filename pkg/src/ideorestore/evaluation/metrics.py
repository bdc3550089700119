"""Ranking metrics: accuracy, hits at k, mean reciprocal rank.

Ranks are 1-based over the candidate character set (punctuation and the
mask placeholder excluded); score ties break by ascending codepoint so
reports are bit-stable. Values are carried as percentages (x100), matching
the usual table convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricSummary:
    accuracy: float
    hits5: float
    hits10: float
    hits20: float
    mrr: float

    def __post_init__(self):
        chain = (self.accuracy, self.hits5, self.hits10, self.hits20)
        if any(b < a - 1e-9 for a, b in zip(chain, chain[1:])):
            raise ValueError(f"metric chain must be non-decreasing: {chain}")
        if not -1e-9 <= self.mrr <= 100 + 1e-9:
            raise ValueError(f"mrr outside [0,100]: {self.mrr}")

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "hits5": self.hits5,
            "hits10": self.hits10,
            "hits20": self.hits20,
            "mrr": self.mrr,
        }

    def format_row(self) -> str:
        return "\t".join(f"{v:.2f}" for v in (self.accuracy, self.hits5, self.hits10, self.hits20, self.mrr))


def rank_to_metrics(ranks) -> MetricSummary:
    """Aggregate a list of 1-based truth ranks."""
    ranks = np.asarray(ranks, dtype=np.int64)
    if ranks.size == 0:
        raise ValueError("no ranks to aggregate")
    if ranks.min() < 1:
        raise ValueError("ranks are 1-based")
    n = ranks.size
    # fsum: correctly rounded, independent of accumulation order
    return MetricSummary(
        accuracy=100.0 * int((ranks == 1).sum()) / n,
        hits5=100.0 * int((ranks <= 5).sum()) / n,
        hits10=100.0 * int((ranks <= 10).sum()) / n,
        hits20=100.0 * int((ranks <= 20).sum()) / n,
        mrr=100.0 * math.fsum(1.0 / r for r in ranks.tolist()) / n,
    )


def rank_of_truth(scores: np.ndarray, truth_id: int, candidate_ids: np.ndarray) -> int:
    """1-based rank of the truth among the candidates, ties by ascending id.

    ``scores`` indexes the full token vocabulary; ``candidate_ids`` is the
    ascending-codepoint candidate set and must contain ``truth_id``.
    """
    cand_scores = scores[candidate_ids]
    truth_pos = np.searchsorted(candidate_ids, truth_id)
    if truth_pos >= len(candidate_ids) or candidate_ids[truth_pos] != truth_id:
        raise ValueError(f"truth id {truth_id} not in the candidate set")
    truth_score = scores[truth_id]
    better = int((cand_scores > truth_score).sum())
    tied_before = int(((cand_scores == truth_score) & (candidate_ids < truth_id)).sum())
    return 1 + better + tied_before


def rank_positions(scores: np.ndarray, truth_ids: np.ndarray, candidate_ids: np.ndarray) -> np.ndarray:
    """Vectorized rank_of_truth over (N, V) score rows."""
    cand = scores[:, candidate_ids]
    truth_scores = np.take_along_axis(scores, truth_ids[:, None], axis=1)
    better = (cand > truth_scores).sum(axis=1)
    tied_before = ((cand == truth_scores) & (candidate_ids[None, :] < truth_ids[:, None])).sum(axis=1)
    return (1 + better + tied_before).astype(np.int64)
