"""Weighted mask sampling over sentences.

Mask positions are drawn without replacement with probability proportional
to the sampling weight of the character at each position, so high-frequency
characters do not dominate the training signal. Punctuation positions are
never maskable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segmentation import Sentence
from .vocabulary import Vocabulary

RANDOM_1_5 = "random_1_5"
MAX_MASKS = 5


class SentenceTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class MaskedSample:
    sentence_id: str
    masked_positions: tuple[int, ...]
    targets: tuple[str, ...]
    context: str

    def __post_init__(self):
        if not 1 <= len(self.masked_positions) <= MAX_MASKS:
            raise ValueError(f"{len(self.masked_positions)} masked positions (must be 1..{MAX_MASKS})")
        if len(set(self.masked_positions)) != len(self.masked_positions):
            raise ValueError("masked positions must be distinct")
        if len(self.targets) != len(self.masked_positions):
            raise ValueError("one target per masked position required")
        for p in self.masked_positions:
            if not 0 <= p < len(self.context):
                raise ValueError(f"position {p} outside sentence bounds")


def sample_masks(
    sentence: Sentence,
    vocab: Vocabulary,
    n_masks: int | str = 1,
    rng: np.random.Generator | None = None,
) -> MaskedSample:
    """Draw masked positions for one sentence.

    ``n_masks`` is an explicit count or ``"random_1_5"`` (uniform 1-5,
    capped at the number of maskable positions). Characters absent from the
    vocabulary get the unseen-character weight.
    """
    if rng is None:
        rng = np.random.default_rng()
    maskable = [i for i, ch in enumerate(sentence.text_model) if vocab.is_maskable(ch)]
    if not maskable:
        raise SentenceTooShortError(f"sentence {sentence.id} too short: no maskable positions")
    if n_masks == RANDOM_1_5:
        k = min(int(rng.integers(1, MAX_MASKS + 1)), len(maskable))
    else:
        k = int(n_masks)
        if k < 1:
            raise ValueError("n_masks must be >= 1")
        if k > len(maskable):
            raise SentenceTooShortError(
                f"sentence {sentence.id} too short: {k} masks requested, "
                f"{len(maskable)} maskable positions"
            )
    w = np.array([vocab.weight(sentence.text_model[i]) for i in maskable], dtype=np.float64)
    probs = w / w.sum()
    chosen = rng.choice(len(maskable), size=k, replace=False, p=probs)
    positions = tuple(sorted(maskable[int(j)] for j in chosen))
    targets = tuple(sentence.text_model[p] for p in positions)
    context = list(sentence.text_model)
    for p in positions:
        context[p] = vocab.mask_symbol
    return MaskedSample(
        sentence_id=sentence.id,
        masked_positions=positions,
        targets=targets,
        context="".join(context),
    )
