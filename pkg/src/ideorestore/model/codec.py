"""Mapping between characters and model token ids.

Ids 0..2 are the specials (pad, unknown, mask placeholder); corpus
characters follow in codepoint order, so id order doubles as the
deterministic tie-break order for ranking.
"""

from __future__ import annotations

import numpy as np

from ..corpus.vocabulary import Vocabulary

PAD_ID = 0
UNK_ID = 1
MASK_ID = 2
N_SPECIALS = 3


class TokenCodec:
    def __init__(self, chars: tuple[str, ...], mask_symbol: str, punctuation: frozenset[str]):
        self.chars = tuple(chars)
        self.mask_symbol = mask_symbol
        self.punctuation = frozenset(punctuation)
        self._char_to_id = {c: i + N_SPECIALS for i, c in enumerate(self.chars)}
        self.vocab_size = N_SPECIALS + len(self.chars)
        # characters eligible as prediction candidates (no punctuation)
        self.candidate_ids = np.array(
            [self._char_to_id[c] for c in self.chars if c not in self.punctuation],
            dtype=np.int64,
        )

    @classmethod
    def from_vocabulary(cls, vocab: Vocabulary) -> "TokenCodec":
        return cls(vocab.chars, vocab.mask_symbol, vocab.punctuation)

    def char_id(self, char: str) -> int:
        if char == self.mask_symbol:
            return MASK_ID
        return self._char_to_id.get(char, UNK_ID)

    def id_char(self, token_id: int) -> str:
        if token_id >= N_SPECIALS:
            return self.chars[token_id - N_SPECIALS]
        return {PAD_ID: "<pad>", UNK_ID: "<unk>", MASK_ID: self.mask_symbol}[token_id]

    def encode(self, text: str) -> np.ndarray:
        return np.array([self.char_id(c) for c in text], dtype=np.int64)

    def encode_batch(self, texts: list[str]) -> tuple[np.ndarray, np.ndarray]:
        """Pad to the longest text; returns (tokens, pad_mask) with pad_mask True at padding."""
        n = len(texts)
        width = max(len(t) for t in texts)
        tokens = np.full((n, width), PAD_ID, dtype=np.int64)
        pad = np.ones((n, width), dtype=bool)
        for i, t in enumerate(texts):
            tokens[i, : len(t)] = self.encode(t)
            pad[i, : len(t)] = False
        return tokens, pad
