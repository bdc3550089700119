from .segmentation import (
    DEFAULT_PUNCTUATION,
    SENTENCE_END,
    Sentence,
    TransliterationTable,
    assign_splits,
    segment_corpus,
)
from .vocabulary import EmptyCorpusError, Vocabulary, build_vocabulary, read_vocabulary, write_vocabulary
from .masking import MaskedSample, SentenceTooShortError, sample_masks
from .manifest import read_manifest, write_manifest

__all__ = [
    "DEFAULT_PUNCTUATION",
    "SENTENCE_END",
    "Sentence",
    "TransliterationTable",
    "assign_splits",
    "segment_corpus",
    "EmptyCorpusError",
    "Vocabulary",
    "build_vocabulary",
    "read_vocabulary",
    "write_vocabulary",
    "MaskedSample",
    "SentenceTooShortError",
    "sample_masks",
    "read_manifest",
    "write_manifest",
]
