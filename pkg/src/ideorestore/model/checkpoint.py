"""Versioned checkpoint archives.

Each archive stores the model kind, its config, the parameter tensors and
a hash of the vocabulary it was trained against; loading refuses a
checkpoint whose vocabulary does not match the runtime one.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import torch

from ..corpus.vocabulary import Vocabulary

FORMAT_VERSION = 1

KIND_LANGUAGE_MODEL = "language_model"
KIND_RESTORER = "restorer"
KIND_IMAGE_CLASSIFIER = "image_classifier"


class VocabularyMismatchError(ValueError):
    pass


def vocabulary_hash(vocab: Vocabulary) -> str:
    """Hash of the canonical vocabulary serialization (chars, counts, weights)."""
    buf = io.StringIO()
    buf.write(f"#mask\t{vocab.mask_symbol}\n")
    buf.write(f"#avg\t{vocab.avg_count!r}\n")
    for ch in vocab.chars:
        buf.write(f"{ch}\t{vocab.counts[ch]}\t{vocab.weights[ch]!r}\n")
    return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()


@dataclass
class Checkpoint:
    kind: str
    config: dict
    state_dict: dict
    vocab_hash: str
    extra: dict


def save_checkpoint(
    path: str | Path,
    kind: str,
    config: dict,
    state_dict: dict,
    vocab_hash: str,
    extra: dict | None = None,
) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "state_dict": state_dict,
        "vocab_hash": vocab_hash,
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path, expected_vocab_hash: str | None = None) -> Checkpoint:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if payload.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format {payload.get('format_version')}")
    ckpt = Checkpoint(
        kind=payload["kind"],
        config=payload["config"],
        state_dict=payload["state_dict"],
        vocab_hash=payload["vocab_hash"],
        extra=payload.get("extra", {}),
    )
    if expected_vocab_hash is not None and ckpt.vocab_hash != expected_vocab_hash:
        raise VocabularyMismatchError(
            f"checkpoint vocabulary {ckpt.vocab_hash[:12]} does not match runtime {expected_vocab_hash[:12]}"
        )
    return ckpt


def restore_model(ckpt: Checkpoint) -> torch.nn.Module:
    """Rebuild the saved model kind from its config and load the parameters."""
    from .baselines import ImageOnlyClassifier
    from .context_encoder import ContextEncoderConfig, MaskedLanguageModel
    from .image_encoder import ImageEncoderConfig
    from .restorer import MultimodalRestorer, RestorerConfig

    if ckpt.kind == KIND_LANGUAGE_MODEL:
        model: torch.nn.Module = MaskedLanguageModel(ContextEncoderConfig(**ckpt.config))
    elif ckpt.kind == KIND_RESTORER:
        model = MultimodalRestorer(RestorerConfig.from_dict(ckpt.config))
    elif ckpt.kind == KIND_IMAGE_CLASSIFIER:
        img = dict(ckpt.config["image"])
        img["channels"] = tuple(img["channels"])
        model = ImageOnlyClassifier(ImageEncoderConfig(**img), ckpt.config["vocab_size"])
    else:
        raise ValueError(f"unknown checkpoint kind {ckpt.kind!r}")
    model.load_state_dict(ckpt.state_dict)
    model.eval()
    return model
