"""Batch assembly for masked-character training and evaluation.

Each sentence draws its masks (and, for multimodal training, its simulated
images) from a generator keyed by (seed, epoch, sentence index), so batches
are reproducible and independent of worker scheduling. Sentences whose
target characters fall outside the label vocabulary, or that have no
maskable positions, are skipped with a warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..corpus.masking import MaskedSample, SentenceTooShortError, sample_masks
from ..corpus.segmentation import Sentence
from ..corpus.vocabulary import Vocabulary
from ..glyphsim.damage import FULL_SEVERITY, CurriculumState
from ..glyphsim.simulate import GlyphSimulator, NoFontCoverageError
from ..model.codec import UNK_ID, TokenCodec
from ..rand import rng_for

logger = logging.getLogger(__name__)


@dataclass
class MaskedBatch:
    samples: list[MaskedSample]
    tokens: np.ndarray  # (B, L) int64
    pad: np.ndarray  # (B, L) bool, True at padding
    position_index: np.ndarray  # (N, 2) rows of (sample row, position)
    labels: np.ndarray  # (N,) label ids
    glyph_chars: list[str]  # (N,) glyph-script characters to render
    rngs: list[np.random.Generator]  # one per sample row, continues the mask stream

    def __len__(self):
        return len(self.samples)

    @property
    def n_positions(self) -> int:
        return len(self.labels)


def build_masked_batch(
    items: list[tuple[Sentence, np.random.Generator]],
    vocab: Vocabulary,
    codec: TokenCodec,
    n_masks: int | str,
) -> MaskedBatch | None:
    """Sample masks for a list of (sentence, rng) pairs and pack tensors."""
    samples: list[MaskedSample] = []
    kept: list[tuple[MaskedSample, Sentence, np.random.Generator]] = []
    for sentence, rng in items:
        try:
            sample = sample_masks(sentence, vocab, n_masks, rng)
        except SentenceTooShortError as e:
            logger.warning("skipping %s: %s", sentence.id, e)
            continue
        if any(codec.char_id(t) == UNK_ID for t in sample.targets):
            logger.warning("skipping %s: target outside label vocabulary", sentence.id)
            continue
        kept.append((sample, sentence, rng))
    if not kept:
        return None
    contexts = [s.context for s, _, _ in kept]
    tokens, pad = codec.encode_batch(contexts)
    position_index = []
    labels = []
    glyph_chars = []
    rngs = []
    for row, (sample, sentence, rng) in enumerate(kept):
        for p in sample.masked_positions:
            position_index.append((row, p))
            labels.append(codec.char_id(sentence.text_model[p]))
            glyph_chars.append(sentence.text_glyph[p])
        samples.append(sample)
        rngs.append(rng)
    return MaskedBatch(
        samples=samples,
        tokens=tokens,
        pad=pad,
        position_index=np.array(position_index, dtype=np.int64),
        labels=np.array(labels, dtype=np.int64),
        glyph_chars=glyph_chars,
        rngs=rngs,
    )


def iter_epoch_batches(
    sentences: list[Sentence],
    vocab: Vocabulary,
    codec: TokenCodec,
    n_masks: int | str,
    batch_size: int,
    seed: int,
    epoch: int,
    shuffle: bool = True,
):
    """Yield MaskedBatch objects for one epoch."""
    order = np.arange(len(sentences))
    if shuffle:
        rng_for(seed, epoch, 0xD15C0).shuffle(order)
    for start in range(0, len(order), batch_size):
        idxs = order[start : start + batch_size]
        items = [(sentences[i], rng_for(seed, epoch, i)) for i in idxs]
        batch = build_masked_batch(items, vocab, codec, n_masks)
        if batch is not None:
            yield batch


def simulate_batch_images(
    batch: MaskedBatch,
    simulator: GlyphSimulator,
    curriculum: CurriculumState = FULL_SEVERITY,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Simulate one (damaged, undamaged, clean) triple per masked position.

    Each position draws from its sentence's generator (continuing the
    stream that sampled the masks). Returns (damaged, undamaged, clean)
    arrays of shape (N,1,64,64) plus a keep mask over the batch's
    positions; positions whose glyph no font covers are dropped and logged.
    """
    n = batch.n_positions
    size = simulator.config.size
    damaged = np.zeros((n, 1, size, size), dtype=np.float32)
    undamaged = np.zeros((n, 1, size, size), dtype=np.float32)
    clean = np.zeros((n, 1, size, size), dtype=np.float32)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        row = int(batch.position_index[i, 0])
        try:
            d, u, c = simulator.simulate_stages(batch.glyph_chars[i], curriculum, batch.rngs[row])
        except NoFontCoverageError as e:
            logger.warning("skipping position: %s", e)
            keep[i] = False
            continue
        damaged[i, 0] = d
        undamaged[i, 0] = u
        clean[i, 0] = c
    return damaged, undamaged, clean, keep
