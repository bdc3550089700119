"""Sentence segmentation and dual-script corpus preparation.

Running text is cut at sentence-ending punctuation; pieces longer than the
length cap are recursively split at the punctuation mark nearest their
center (midpoint if none). Each sentence carries two per-character-aligned
versions: the model script (fed to the language model) and the glyph script
(used for rendering). The mapping between them is a plain per-character
table injected by the caller, so non-Chinese scripts can reuse the pipeline
with an identity table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

# Sentence-ending marks terminate a sentence and stay attached to it.
SENTENCE_END = frozenset("。！？!?.;；…")
# Clause marks never end a sentence but are preferred split points for
# over-long sentences.
CLAUSE_BREAK = frozenset("，、,：:")
QUOTES_AND_BRACKETS = frozenset("\"'“”‘’()（）《》〈〉「」『』【】[]")
DEFAULT_PUNCTUATION = SENTENCE_END | CLAUSE_BREAK | QUOTES_AND_BRACKETS | frozenset("·—－-")

MAX_SENTENCE_LEN = 50


@dataclass(frozen=True)
class Sentence:
    """A dual-script sentence; both texts are per-character aligned."""

    id: str
    text_model: str
    text_glyph: str
    split: str = "train"

    def __post_init__(self):
        if len(self.text_model) != len(self.text_glyph):
            raise ValueError(
                f"sentence {self.id}: model/glyph scripts differ in length "
                f"({len(self.text_model)} vs {len(self.text_glyph)})"
            )
        if len(self.text_model) == 0:
            raise ValueError(f"sentence {self.id}: empty")
        if self.split not in ("train", "dev", "test"):
            raise ValueError(f"sentence {self.id}: unknown split {self.split!r}")

    def __len__(self):
        return len(self.text_model)


class TransliterationTable:
    """One-to-one per-character mapping from the glyph script to the model script.

    Characters missing from the table map to themselves; each distinct
    missing character is recorded once and logged as a warning.
    """

    def __init__(self, mapping: dict[str, str] | None = None):
        self.mapping = dict(mapping) if mapping else {}
        for src, dst in self.mapping.items():
            if len(src) != 1 or len(dst) != 1:
                raise ValueError(f"table entries must be single characters: {src!r} -> {dst!r}")
        self.missing: set[str] = set()

    @classmethod
    def identity(cls) -> "TransliterationTable":
        return cls({})

    def convert_char(self, char: str) -> str:
        if char in self.mapping:
            return self.mapping[char]
        if self.mapping and char not in self.missing:
            self.missing.add(char)
            logger.warning("character %r missing from transliteration table; mapped to itself", char)
        return char

    def convert(self, text: str) -> str:
        return "".join(self.convert_char(c) for c in text)


def _split_long(piece: str, max_len: int, punctuation: frozenset[str]) -> list[str]:
    """Recursively split an over-long piece near its center.

    Split candidates are punctuation positions (the punctuation ends the
    left half); with none available the piece is cut at its midpoint.
    """
    if len(piece) <= max_len:
        return [piece]
    center = len(piece) / 2
    candidates = [i for i in range(len(piece) - 1) if piece[i] in punctuation]
    if candidates:
        # boundary after index i; the cut closest to the center wins,
        # earlier position on ties
        cut = min(candidates, key=lambda i: (abs((i + 1) - center), i)) + 1
    else:
        cut = len(piece) // 2
    return _split_long(piece[:cut], max_len, punctuation) + _split_long(piece[cut:], max_len, punctuation)


def _raw_sentences(raw_text: str, sentence_end: frozenset[str]) -> list[str]:
    """Cut running text at sentence-ending punctuation and line breaks.

    Trailing end marks stay attached to their sentence; whitespace acts
    as a hard boundary and is dropped.
    """
    out: list[str] = []
    buf: list[str] = []
    chars = raw_text
    i = 0
    n = len(chars)
    while i < n:
        ch = chars[i]
        if ch.isspace():
            if buf:
                out.append("".join(buf))
                buf = []
            i += 1
            continue
        buf.append(ch)
        if ch in sentence_end:
            # absorb any immediately following end marks ("……", "!?")
            while i + 1 < n and chars[i + 1] in sentence_end:
                i += 1
                buf.append(chars[i])
            out.append("".join(buf))
            buf = []
        i += 1
    if buf:
        out.append("".join(buf))
    return out


def segment_corpus(
    raw_text: str,
    max_len: int = MAX_SENTENCE_LEN,
    table: TransliterationTable | None = None,
    sentence_end: frozenset[str] = SENTENCE_END,
    punctuation: frozenset[str] = DEFAULT_PUNCTUATION,
    id_prefix: str = "s",
    id_start: int = 0,
) -> list[Sentence]:
    """Segment punctuation-delimited running text into dual-script sentences.

    The raw text is taken to be in the glyph script; ``table`` maps it to
    the model script (identity when omitted). Every output sentence has at
    most ``max_len`` characters, punctuation included.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if table is None:
        table = TransliterationTable.identity()
    sentences: list[Sentence] = []
    counter = id_start
    for piece in _raw_sentences(raw_text, sentence_end):
        for part in _split_long(piece, max_len, punctuation):
            if not part:
                continue
            sentences.append(
                Sentence(
                    id=f"{id_prefix}{counter:06d}",
                    text_model=table.convert(part),
                    text_glyph=part,
                )
            )
            counter += 1
    return sentences


def assign_splits(
    sentences: list[Sentence],
    dev_size: int,
    test_size: int,
    rng,
) -> list[Sentence]:
    """Assign train/dev/test splits by a seeded shuffle of sentence indices."""
    if dev_size + test_size > len(sentences):
        raise ValueError("dev + test sizes exceed the corpus")
    order = rng.permutation(len(sentences))
    dev_idx = set(order[:dev_size].tolist())
    test_idx = set(order[dev_size : dev_size + test_size].tolist())
    out = []
    for i, s in enumerate(sentences):
        split = "dev" if i in dev_idx else "test" if i in test_idx else "train"
        out.append(Sentence(id=s.id, text_model=s.text_model, text_glyph=s.text_glyph, split=split))
    return out
