"""Character vocabulary with frequency-clamped sampling weights.

Each character's sampling weight is sqrt(1 / max(count, avg_count)), so
characters rarer than average all share the weight of an average-frequency
character and high-frequency characters are down-weighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .segmentation import DEFAULT_PUNCTUATION, Sentence

DEFAULT_MASK_SYMBOL = "□"


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    chars: tuple[str, ...]  # sorted by codepoint
    counts: dict[str, int]
    avg_count: float
    weights: dict[str, float]
    mask_symbol: str = DEFAULT_MASK_SYMBOL
    punctuation: frozenset[str] = DEFAULT_PUNCTUATION

    def __post_init__(self):
        if self.mask_symbol in self.counts:
            raise ValueError(f"mask symbol {self.mask_symbol!r} collides with a corpus character")

    def __len__(self):
        return len(self.chars)

    def __contains__(self, char: str) -> bool:
        return char in self.counts

    @property
    def default_weight(self) -> float:
        """Weight for characters never seen in the training split."""
        return math.sqrt(1.0 / self.avg_count)

    def weight(self, char: str) -> float:
        return self.weights.get(char, self.default_weight)

    def is_maskable(self, char: str) -> bool:
        return char not in self.punctuation and char != self.mask_symbol


def build_vocabulary(
    train_sentences: list[Sentence],
    mask_symbol: str = DEFAULT_MASK_SYMBOL,
    punctuation: frozenset[str] = DEFAULT_PUNCTUATION,
) -> Vocabulary:
    """Count model-script characters over the training split and derive weights."""
    counts: dict[str, int] = {}
    for s in train_sentences:
        if s.split != "train":
            continue
        for ch in s.text_model:
            counts[ch] = counts.get(ch, 0) + 1
    if not counts:
        raise EmptyCorpusError("empty corpus")
    avg = sum(counts.values()) / len(counts)
    weights = {c: math.sqrt(1.0 / max(n, avg)) for c, n in counts.items()}
    chars = tuple(sorted(counts))
    return Vocabulary(
        chars=chars,
        counts=counts,
        avg_count=avg,
        weights=weights,
        mask_symbol=mask_symbol,
        punctuation=punctuation,
    )


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    """Write ``char<TAB>count<TAB>weight`` lines sorted by codepoint.

    Weights use repr (shortest round-trip form) so the file is bit-exact
    across runs.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        f.write(f"#mask\t{vocab.mask_symbol}\n")
        f.write(f"#avg\t{vocab.avg_count!r}\n")
        for ch in vocab.chars:
            f.write(f"{ch}\t{vocab.counts[ch]}\t{vocab.weights[ch]!r}\n")


def read_vocabulary(path: str | Path, punctuation: frozenset[str] = DEFAULT_PUNCTUATION) -> Vocabulary:
    path = Path(path)
    counts: dict[str, int] = {}
    weights: dict[str, float] = {}
    mask_symbol = DEFAULT_MASK_SYMBOL
    avg = None
    with path.open("r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "#mask":
                mask_symbol = fields[1]
                continue
            if fields[0] == "#avg":
                avg = float(fields[1])
                continue
            ch, n, w = fields
            counts[ch] = int(n)
            weights[ch] = float(w)
    if not counts:
        raise EmptyCorpusError(f"empty vocabulary file {path}")
    if avg is None:
        avg = sum(counts.values()) / len(counts)
    return Vocabulary(
        chars=tuple(sorted(counts)),
        counts=counts,
        avg_count=avg,
        weights=weights,
        mask_symbol=mask_symbol,
        punctuation=punctuation,
    )
