"""Serve the restoration API against a fixed tiny checkpoint.

Used by the workbench integration tests: builds (and caches) a small
deterministic corpus + briefly-finetuned model bundle, then serves it.
The checkpoint is fully seeded, so candidate lists are stable across runs.

Usage: python3 scripts/serve_fixture.py [--port 8031] [--cache DIR]
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

REPO = Path(__file__).resolve().parents[1]

from ideorestore.corpus import assign_splits, build_vocabulary, read_manifest, read_vocabulary, segment_corpus, write_manifest, write_vocabulary
from ideorestore.glyphsim import FontLibrary, GlyphSimulator, SimulationConfig
from ideorestore.model import MultimodalRestorer, TokenCodec, load_checkpoint, save_checkpoint, vocabulary_hash
from ideorestore.model.checkpoint import KIND_LANGUAGE_MODEL, KIND_RESTORER, restore_model
from ideorestore.model.context_encoder import ContextEncoderConfig, MaskedLanguageModel
from ideorestore.model.decoders import GlyphDecoderConfig
from ideorestore.model.image_encoder import ImageEncoderConfig
from ideorestore.service import GapPredictor, SessionStore, create_app
from ideorestore.toydata import ToyLanguage, ToyLanguageSpec, covered_letters
from ideorestore.training import LMTrainConfig, train_masked_lm

FONT_DIR = "/usr/share/fonts/truetype/dejavu"


def build_fixture(cache: Path) -> None:
    cache.mkdir(parents=True, exist_ok=True)
    fonts = FontLibrary.from_dir(FONT_DIR)
    spec = ToyLanguageSpec(n_chars=60, n_classes=6, sentence_len=(5, 12), seed=5)
    chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
    lang = ToyLanguage(spec, chars)
    sentences = segment_corpus("\n".join(lang.documents(320)))
    sentences = assign_splits(sentences, 30, 30, np.random.default_rng(0))
    vocab = build_vocabulary(sentences)
    codec = TokenCodec.from_vocabulary(vocab)
    write_manifest(sentences, cache / "sentences.jsonl")
    write_vocabulary(vocab, cache / "vocab.tsv")

    enc = ContextEncoderConfig(vocab_size=codec.vocab_size, dim=48, layers=2, heads=2, ffn_dim=96, max_len=30, dropout=0.05)
    torch.manual_seed(10)
    lm = MaskedLanguageModel(enc)
    train = [s for s in sentences if s.split == "train"]
    dev = [s for s in sentences if s.split == "dev"]
    train_masked_lm(lm, train, dev, vocab, codec, LMTrainConfig(epochs=3, batch_size=64, lr=1e-3, seed=0))
    lm.eval()
    vhash = vocabulary_hash(vocab)
    save_checkpoint(cache / "lm.pt", KIND_LANGUAGE_MODEL, enc.to_dict(), lm.state_dict(), vhash)

    torch.manual_seed(11)
    restorer = MultimodalRestorer.from_language_model(
        lm, ImageEncoderConfig(dim=48, channels=(8, 16)), GlyphDecoderConfig(dim=48, base_channels=16)
    )
    # seeded nudge so the visual branch visibly shifts candidate scores
    with torch.no_grad():
        gen = torch.Generator().manual_seed(12)
        restorer.image_encoder.proj.weight.copy_(torch.randn(restorer.image_encoder.proj.weight.shape, generator=gen) * 0.05)
    save_checkpoint(cache / "restorer.pt", KIND_RESTORER, restorer.cfg.to_dict(), restorer.state_dict(), vhash)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=8031)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--cache", default=str(REPO / ".service-fixture"))
    parser.add_argument("--build-only", action="store_true")
    args = parser.parse_args()

    cache = Path(args.cache)
    if not (cache / "restorer.pt").exists():
        build_fixture(cache)
    if args.build_only:
        print(f"fixture ready at {cache}")
        return 0

    vocab = read_vocabulary(cache / "vocab.tsv")
    codec = TokenCodec.from_vocabulary(vocab)
    vhash = vocabulary_hash(vocab)
    restorer = restore_model(load_checkpoint(cache / "restorer.pt", vhash))
    lm = restore_model(load_checkpoint(cache / "lm.pt", vhash))
    simulator = GlyphSimulator(FontLibrary.from_dir(FONT_DIR), SimulationConfig())
    predictor = GapPredictor(restorer, lm, vocab, codec, simulator)
    app = create_app(SessionStore(), {"default": predictor})

    import uvicorn

    print(f"fixture service on http://{args.host}:{args.port}/v1", flush=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
