from .codec import TokenCodec
from .context_encoder import ContextEncoder, ContextEncoderConfig, MaskedLanguageModel, MaskedLMHead, PositionNotMaskedError
from .image_encoder import ImageEncoder, ImageEncoderConfig
from .decoders import GlyphDecoder, GlyphDecoderConfig
from .restorer import MultimodalRestorer, PredictionOutput, RestorerConfig, fuse
from .baselines import ImageOnlyClassifier
from .checkpoint import VocabularyMismatchError, load_checkpoint, save_checkpoint, vocabulary_hash

__all__ = [
    "TokenCodec",
    "ContextEncoder",
    "ContextEncoderConfig",
    "MaskedLanguageModel",
    "MaskedLMHead",
    "PositionNotMaskedError",
    "ImageEncoder",
    "ImageEncoderConfig",
    "GlyphDecoder",
    "GlyphDecoderConfig",
    "MultimodalRestorer",
    "PredictionOutput",
    "RestorerConfig",
    "fuse",
    "ImageOnlyClassifier",
    "VocabularyMismatchError",
    "load_checkpoint",
    "save_checkpoint",
    "vocabulary_hash",
]
