"""Near-desk-scale calibration run with per-stage caching.

Writes checkpoints and numbers to .calib/ so repeated invocations skip
completed stages.
"""

import copy
import json
import time
from pathlib import Path

import numpy as np
import torch

from ideorestore.corpus import assign_splits, build_vocabulary, segment_corpus
from ideorestore.evaluation import (
    ImageOnlyPredictor,
    RestorerPredictor,
    TextOnlyPredictor,
    evaluate,
)
from ideorestore.glyphsim import AugmentationRanges, DamageRanges, FontLibrary, GlyphSimulator, SimulationConfig
from ideorestore.model import ImageOnlyClassifier, MultimodalRestorer, TokenCodec, save_checkpoint, load_checkpoint, vocabulary_hash
from ideorestore.model.checkpoint import restore_model
from ideorestore.model.context_encoder import ContextEncoderConfig, MaskedLanguageModel
from ideorestore.model.decoders import GlyphDecoderConfig
from ideorestore.model.image_encoder import ImageEncoderConfig
from ideorestore.toydata import ToyLanguage, ToyLanguageSpec, covered_letters
from ideorestore.training import LMTrainConfig, TrainConfig, finetune_lm, pretrain_lm, train_restorer
from ideorestore.training.lm import masked_accuracy
from ideorestore.training.trainer import train_image_classifier

CAL = Path(".calib")
CAL.mkdir(exist_ok=True)
T0 = time.time()


def tic(msg):
    print(f"[{time.time()-T0:7.1f}s] {msg}", flush=True)


fonts = FontLibrary.from_dir("/usr/share/fonts/truetype/dejavu")
spec = ToyLanguageSpec(seed=1)
chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
lang = ToyLanguage(spec, chars)
sentences = segment_corpus("\n".join(lang.documents(6000)))
sentences = assign_splits(sentences, 500, 500, np.random.default_rng(0))
train = [s for s in sentences if s.split == "train"]
dev = [s for s in sentences if s.split == "dev"]
test = [s for s in sentences if s.split == "test"]
vocab = build_vocabulary(sentences)
codec = TokenCodec.from_vocabulary(vocab)
vhash = vocabulary_hash(vocab)
# desk-scale simulation: milder than library defaults so the visual branch
# is learnable in the single-core step budget
sim = GlyphSimulator(fonts, SimulationConfig(
    augment=AugmentationRanges(texture_strength=(0.0, 0.25)),
    damage=DamageRanges(rect_length=(9.6, 41.6), rect_width=(9.6, 41.6), n_spots=(0, 6)),
))
tic(f"corpus {len(train)}/{len(dev)}/{len(test)}, vocab {len(vocab)}")

enc_cfg = ContextEncoderConfig(vocab_size=codec.vocab_size, dim=128, layers=3, heads=4, ffn_dim=384, max_len=52, dropout=0.05)
img_cfg = ImageEncoderConfig(dim=128, channels=(12, 24, 48, 96))
dec_cfg = GlyphDecoderConfig(dim=128, base_channels=64)

# stage: LM pretrain
lm_pre_path = CAL / "lm_pre.pt"
if not lm_pre_path.exists():
    torch.manual_seed(0)
    lm = MaskedLanguageModel(enc_cfg)
    h = pretrain_lm(train, dev, vocab, codec, lm, LMTrainConfig(epochs=6, batch_size=128, lr=1.2e-3, seed=0))
    save_checkpoint(lm_pre_path, "language_model", enc_cfg.to_dict(), lm.state_dict(), vhash, {"history": h})
    tic(f"pretrain dev acc: {['%.3f'%x for x in h['dev_accuracy']]}")
lm_pre = restore_model(load_checkpoint(lm_pre_path, vhash))

# stage: LM finetune
lm_ft_path = CAL / "lm_ft.pt"
if not lm_ft_path.exists():
    lm = copy.deepcopy(lm_pre)
    h = finetune_lm(train, dev, vocab, codec, lm, LMTrainConfig(epochs=24, batch_size=128, lr=1e-3, seed=1))
    save_checkpoint(lm_ft_path, "language_model", enc_cfg.to_dict(), lm.state_dict(), vhash, {"history": {k: v for k, v in h.items()}})
    tic(f"finetune dev acc final {h['dev_accuracy'][-1]:.3f}")
lm_ft = restore_model(load_checkpoint(lm_ft_path, vhash))
acc_pre = masked_accuracy(lm_pre, dev, vocab, codec, seed=7, n_masks=1)
acc_ft = masked_accuracy(lm_ft, dev, vocab, codec, seed=7, n_masks=1)
tic(f"single-mask dev acc: LM {acc_pre:.3f} -> LM-ft {acc_ft:.3f}")

# stage: image baseline (also the warm start for the multimodal trunk)
img_path = CAL / "img.pt"
if not img_path.exists():
    torch.manual_seed(2)
    clf = ImageOnlyClassifier(img_cfg, codec.vocab_size)
    h = train_image_classifier(clf, sim, train, dev, vocab, codec, LMTrainConfig(epochs=30, batch_size=128, lr=1e-3, seed=2, n_masks=1))
    save_checkpoint(img_path, "image_classifier", {"image": img_cfg.to_dict(), "vocab_size": codec.vocab_size}, clf.state_dict(), vhash, {"history": h})
    tic(f"img dev acc: {['%.3f'%x for x in h['dev_accuracy'][::3]]} final {h['dev_accuracy'][-1]:.3f}")
clf = restore_model(load_checkpoint(img_path, vhash))


def train_multimodal(name, alpha, seed):
    path = CAL / f"{name}.pt"
    if path.exists():
        return restore_model(load_checkpoint(path, vhash))
    torch.manual_seed(seed)
    model = MultimodalRestorer.from_language_model(lm_ft, img_cfg, dec_cfg)
    model.load_image_trunk(clf.trunk.state_dict())
    res = train_restorer(model, sim, train, dev, vocab, codec,
                         TrainConfig(alpha=alpha, batch_size=128, epochs=30, curriculum_epochs=10, lr0=5e-4, lr_final=5e-6, seed=seed, n_masks=1),
                         out_dir=CAL / f"{name}_run")
    model.load_state_dict(res.best_state)
    save_checkpoint(path, "restorer", model.cfg.to_dict(), res.best_state, vhash,
                    {"history": res.history, "best_epoch": res.best_epoch})
    tic(f"{name} dev acc: {['%.3f'%x for x in res.history['dev_accuracy'][::3]]} best {res.best_dev_accuracy:.3f} @ {res.best_epoch}")
    tic(f"{name} damage frac: {['%.3f'%x for x in res.history['damaged_fraction'][:12]]}")
    return model


mrm = train_multimodal("mrm", 0.0, 4)
mmrm = train_multimodal("mmrm", 100.0, 3)

results = {}
for name, pred, needs_sim in [
    ("MMRM", RestorerPredictor(mmrm), True),
    ("MRM", RestorerPredictor(mrm), True),
    ("LM_ft", TextOnlyPredictor(lm_ft), False),
    ("LM", TextOnlyPredictor(lm_pre), False),
    ("Img", ImageOnlyPredictor(clf), True),
]:
    r = evaluate(pred, test, vocab, codec, sim if needs_sim else None, n_masks=1, resamples=5, seed=9)
    results[name] = r.mean.as_dict()
    tic(f"{name:5s} {r.mean.format_row()}")

(CAL / "results.json").write_text(json.dumps(results, indent=2))
tic("done")
