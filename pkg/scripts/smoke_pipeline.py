"""Manual end-to-end smoke run (tiny scale) with stage timings."""

import time

import numpy as np
import torch

from ideorestore.corpus import assign_splits, build_vocabulary, segment_corpus
from ideorestore.evaluation import RestorerPredictor, TextOnlyPredictor, ImageOnlyPredictor, evaluate
from ideorestore.glyphsim import FontLibrary, GlyphSimulator, SimulationConfig
from ideorestore.model import (
    ImageOnlyClassifier,
    MultimodalRestorer,
    TokenCodec,
)
from ideorestore.model.context_encoder import ContextEncoderConfig, MaskedLanguageModel
from ideorestore.model.image_encoder import ImageEncoderConfig
from ideorestore.model.decoders import GlyphDecoderConfig
from ideorestore.toydata import ToyLanguage, ToyLanguageSpec, covered_letters
from ideorestore.training import LMTrainConfig, TrainConfig, finetune_lm, pretrain_lm, train_restorer
from ideorestore.training.trainer import train_image_classifier

t0 = time.time()

def tic(label):
    print(f"[{time.time()-t0:7.1f}s] {label}", flush=True)

fonts = FontLibrary.from_dir("/usr/share/fonts/truetype/dejavu")
spec = ToyLanguageSpec(n_chars=120, n_classes=12, seed=1)
chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
lang = ToyLanguage(spec, chars)
docs = lang.documents(700)
raw = "\n".join(docs)
sentences = segment_corpus(raw)
rng = np.random.default_rng(0)
sentences = assign_splits(sentences, dev_size=60, test_size=60, rng=rng)
train = [s for s in sentences if s.split == "train"]
dev = [s for s in sentences if s.split == "dev"]
test = [s for s in sentences if s.split == "test"]
tic(f"corpus: {len(train)} train / {len(dev)} dev / {len(test)} test")

vocab = build_vocabulary(sentences)
codec = TokenCodec.from_vocabulary(vocab)
tic(f"vocab: {len(vocab)} chars, vocab_size {codec.vocab_size}")

sim = GlyphSimulator(fonts, SimulationConfig())

enc_cfg = ContextEncoderConfig(vocab_size=codec.vocab_size, dim=96, layers=3, heads=4, ffn_dim=256, max_len=52, dropout=0.1)
torch.manual_seed(0)
lm = MaskedLanguageModel(enc_cfg)
pre_hist = pretrain_lm(train, dev, vocab, codec, lm, LMTrainConfig(epochs=2, batch_size=128, lr=1e-3, seed=0))
tic(f"pretrain: dev acc {pre_hist['dev_accuracy']}")
import copy
lm_pre = copy.deepcopy(lm)
ft_hist = finetune_lm(train, dev, vocab, codec, lm, LMTrainConfig(epochs=4, batch_size=128, lr=5e-4, seed=1))
tic(f"finetune: {ft_hist['dev_accuracy_before']:.3f} -> {ft_hist['dev_accuracy_after']:.3f}")

img_cfg = ImageEncoderConfig(dim=96, channels=(12, 24, 48, 96))
dec_cfg = GlyphDecoderConfig(dim=96, base_channels=48)

torch.manual_seed(0)
clf = ImageOnlyClassifier(img_cfg, codec.vocab_size)
img_hist = train_image_classifier(clf, sim, train, dev, vocab, codec, LMTrainConfig(epochs=4, batch_size=128, lr=1e-3, seed=2, n_masks=1))
tic(f"img baseline: dev acc {img_hist['dev_accuracy']}")

torch.manual_seed(0)
mmrm = MultimodalRestorer.from_language_model(lm, img_cfg, dec_cfg)
res = train_restorer(mmrm, sim, train, dev, vocab, codec, TrainConfig(alpha=100.0, batch_size=128, epochs=6, curriculum_epochs=3, lr0=1e-3, lr_final=1e-4, seed=3, n_masks=1))
tic(f"mmrm: dev acc {res.history['dev_accuracy']}, damage frac {['%.3f'%f for f in res.history['damaged_fraction']]}")

mmrm.load_state_dict(res.best_state)
r_mm = evaluate(RestorerPredictor(mmrm), test, vocab, codec, sim, n_masks=1, resamples=3, seed=9)
r_lm = evaluate(TextOnlyPredictor(lm), test, vocab, codec, None, n_masks=1, resamples=3, seed=9)
r_img = evaluate(ImageOnlyPredictor(clf), test, vocab, codec, sim, n_masks=1, resamples=3, seed=9)
tic(f"eval: MMRM acc {r_mm.mean.accuracy:.2f} / LM-ft {r_lm.mean.accuracy:.2f} / Img {r_img.mean.accuracy:.2f}")
print("MMRM:", r_mm.mean.format_row())
print("LMft:", r_lm.mean.format_row())
print("Img :", r_img.mean.format_row())
