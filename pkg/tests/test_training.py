import copy
import json
import math

import numpy as np
import pytest
import torch

from ideorestore.corpus import Sentence, build_vocabulary
from ideorestore.glyphsim import GlyphSimulator, SimulationConfig
from ideorestore.model import MultimodalRestorer, TokenCodec
from ideorestore.model.context_encoder import ContextEncoderConfig, MaskedLanguageModel
from ideorestore.model.decoders import GlyphDecoderConfig
from ideorestore.model.image_encoder import ImageEncoderConfig
from ideorestore.training import (
    LMTrainConfig,
    LossBreakdown,
    TrainConfig,
    TrainingDivergedError,
    finetune_lm,
    predicting_loss,
    pretrain_lm,
    restoring_loss,
    total_loss,
    train_masked_lm,
    train_restorer,
)
from ideorestore.training.lm import masked_accuracy
from ideorestore.training.trainer import epoch_lr


class TestRestoringLoss:
    def test_identical_images_zero(self):
        a = torch.rand(4, 1, 64, 64)
        assert restoring_loss(a, a).item() == 0.0

    def test_all_zero_vs_all_one(self):
        a = torch.zeros(2, 1, 64, 64)
        b = torch.ones(2, 1, 64, 64)
        assert restoring_loss(a, b).item() == 1.0

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(0)
        a = rng.random((3, 8, 8))
        b = rng.random((3, 8, 8))
        # brute-force pixel loop
        total = 0.0
        for x, y in zip(a.flat, b.flat):
            total += (x - y) ** 2
        oracle = total / a.size
        val = restoring_loss(torch.from_numpy(a), torch.from_numpy(b)).item()
        assert abs(val - oracle) < 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            restoring_loss(torch.zeros(1, 4, 4), torch.zeros(1, 5, 5))


class TestPredictingLoss:
    def test_huge_margin_goes_to_zero(self):
        logits = torch.full((1, 10), -1e4)
        logits[0, 3] = 1e4
        assert predicting_loss(logits, torch.tensor([3])).item() < 1e-6

    def test_uniform_logits_ln_v(self):
        v = 37
        logits = torch.zeros(5, v)
        labels = torch.arange(5)
        assert predicting_loss(logits, labels).item() == pytest.approx(math.log(v), abs=1e-6)

    def test_matches_logsumexp_oracle(self):
        rng = np.random.default_rng(1)
        logits = rng.normal(size=(6, 20))
        labels = rng.integers(0, 20, size=6)
        oracle = 0.0
        for row, y in zip(logits, labels):
            oracle += math.log(sum(math.exp(x - row.max()) for x in row)) + row.max() - row[y]
        oracle /= len(labels)
        val = predicting_loss(torch.from_numpy(logits), torch.from_numpy(labels)).item()
        assert abs(val - oracle) < 1e-7

    def test_out_of_vocabulary_label(self):
        with pytest.raises(ValueError, match="label outside vocabulary"):
            predicting_loss(torch.zeros(1, 5), torch.tensor([7]))


class TestTotalLoss:
    def test_alpha_zero_reduces_to_prediction(self):
        logits = torch.randn(3, 9)
        labels = torch.tensor([0, 1, 2])
        restored = torch.rand(3, 1, 8, 8)
        targets = torch.rand(3, 1, 8, 8)
        total, breakdown = total_loss(logits, labels, restored, targets, alpha=0.0)
        assert total.item() == predicting_loss(logits, labels).item()
        assert breakdown.total == breakdown.predict

    def test_composition_example(self):
        b = LossBreakdown(restore=0.01, predict=1.0, total=2.0, alpha=100.0)
        assert b.total == 2.0
        with pytest.raises(ValueError, match="total"):
            LossBreakdown(restore=0.01, predict=1.0, total=1.5, alpha=100.0)

    def test_composition_identity_holds(self):
        rng = torch.Generator().manual_seed(0)
        for alpha in (0.0, 1.0, 100.0):
            logits = torch.randn(4, 12, generator=rng)
            labels = torch.randint(0, 12, (4,), generator=rng)
            restored = torch.rand(4, 1, 8, 8, generator=rng)
            targets = torch.rand(4, 1, 8, 8, generator=rng)
            total, b = total_loss(logits, labels, restored, targets, alpha)
            assert b.total == pytest.approx(alpha * b.restore + b.predict, rel=1e-9)

    def test_gradient_matches_finite_differences(self):
        # small double-precision probe; the full acceptance check runs the
        # same oracle on a bigger parameter sample
        torch.manual_seed(0)
        enc = ContextEncoderConfig(vocab_size=12, dim=8, layers=1, heads=2, ffn_dim=16, max_len=8, dropout=0.0)
        lm = MaskedLanguageModel(enc)
        model = MultimodalRestorer.from_language_model(
            lm, ImageEncoderConfig(dim=8, channels=(4,)), GlyphDecoderConfig(dim=8, base_channels=8)
        ).double()
        model.train()
        tokens = torch.tensor([[3, 2, 4, 5]])
        index = torch.tensor([[0, 1]])
        images = torch.rand(1, 1, 64, 64, dtype=torch.float64)
        targets = torch.rand(1, 1, 64, 64, dtype=torch.float64)
        labels = torch.tensor([6])

        def loss_value():
            out = model(tokens, None, index, images)
            total, _ = total_loss(out["logits"], labels, out["restored"], targets, alpha=100.0)
            return total

        loss = loss_value()
        params = [p for p in model.trainable_parameters()]
        grads = torch.autograd.grad(loss, params)
        rng = np.random.default_rng(3)
        checked = 0
        for p, g in zip(params, grads):
            flat = p.detach().view(-1)
            idx = int(rng.integers(flat.numel()))
            eps = 1e-5
            with torch.no_grad():
                old = flat[idx].item()
                flat[idx] = old + eps
                up = loss_value().item()
                flat[idx] = old - eps
                down = loss_value().item()
                flat[idx] = old
            fd = (up - down) / (2 * eps)
            an = g.view(-1)[idx].item()
            assert abs(an - fd) <= 1e-4 * max(1.0, abs(fd)), f"param {checked}: {an} vs {fd}"
            checked += 1
            if checked >= 8:
                break


def _tiny_lm_setup(tiny_corpus, tiny_vocab, tiny_codec, dim=48):
    cfg = ContextEncoderConfig(vocab_size=tiny_codec.vocab_size, dim=dim, layers=2, heads=2, ffn_dim=96, max_len=30, dropout=0.05)
    torch.manual_seed(0)
    return MaskedLanguageModel(cfg)


class TestLMStages:
    def test_one_sentence_memorization(self):
        text = "abcdefghij"
        s = Sentence(id="s0", text_model=text, text_glyph=text)
        vocab = build_vocabulary([s])
        codec = TokenCodec.from_vocabulary(vocab)
        cfg = ContextEncoderConfig(vocab_size=codec.vocab_size, dim=32, layers=2, heads=2, ffn_dim=64, max_len=12, dropout=0.0)
        torch.manual_seed(0)
        lm = MaskedLanguageModel(cfg)
        train_masked_lm(lm, [s] * 32, [s] * 8, vocab, codec, LMTrainConfig(epochs=25, batch_size=32, lr=2e-3, seed=0, n_masks=1))
        assert masked_accuracy(lm, [s] * 8, vocab, codec, seed=0, n_masks=1) == 1.0

    def test_finetune_improves_dev_accuracy(self, tiny_corpus, tiny_vocab, tiny_codec):
        train = [s for s in tiny_corpus if s.split == "train"]
        dev = [s for s in tiny_corpus if s.split == "dev"]
        lm = _tiny_lm_setup(tiny_corpus, tiny_vocab, tiny_codec)
        pretrain_lm(train, dev, tiny_vocab, tiny_codec, lm, LMTrainConfig(epochs=2, batch_size=64, lr=1e-3, seed=0))
        h = finetune_lm(train, dev, tiny_vocab, tiny_codec, lm, LMTrainConfig(epochs=8, batch_size=64, lr=1e-3, seed=1))
        assert h["dev_accuracy_after"] > h["dev_accuracy_before"]

    def test_snapshot_reload_identical_logits(self, tiny_corpus, tiny_vocab, tiny_codec, tmp_path):
        from ideorestore.model import load_checkpoint, save_checkpoint, vocabulary_hash
        from ideorestore.model.checkpoint import restore_model

        lm = _tiny_lm_setup(tiny_corpus, tiny_vocab, tiny_codec)
        path = tmp_path / "lm.pt"
        save_checkpoint(path, "language_model", lm.cfg.to_dict(), lm.state_dict(), vocabulary_hash(tiny_vocab))
        lm2 = restore_model(load_checkpoint(path))
        tokens, pad = tiny_codec.encode_batch([s.text_model for s in tiny_corpus[:8]])
        tokens[:, 1] = 2
        index = torch.tensor([[i, 1] for i in range(8)])
        with torch.no_grad():
            a = lm.eval(), lm.logits_at(torch.from_numpy(tokens), torch.from_numpy(pad), index)
            b = lm2.logits_at(torch.from_numpy(tokens), torch.from_numpy(pad), index)
        assert torch.equal(a[1], b)

    def test_divergence_aborts(self, tiny_corpus, tiny_vocab, tiny_codec):
        train = [s for s in tiny_corpus if s.split == "train"][:64]
        lm = _tiny_lm_setup(tiny_corpus, tiny_vocab, tiny_codec)
        with pytest.raises(TrainingDivergedError, match="not finite"):
            train_masked_lm(lm, train, train, tiny_vocab, tiny_codec, LMTrainConfig(epochs=3, batch_size=64, lr=1e18, seed=0))


@pytest.fixture(scope="module")
def tiny_restorer_setup(tiny_corpus, tiny_vocab, tiny_codec, fonts):
    train = [s for s in tiny_corpus if s.split == "train"][:120]
    dev = [s for s in tiny_corpus if s.split == "dev"]
    cfg = ContextEncoderConfig(vocab_size=tiny_codec.vocab_size, dim=48, layers=2, heads=2, ffn_dim=96, max_len=30, dropout=0.0)
    torch.manual_seed(0)
    lm = MaskedLanguageModel(cfg)
    sim = GlyphSimulator(fonts, SimulationConfig())
    return train, dev, lm, sim


def _fresh_restorer(lm):
    torch.manual_seed(1)
    return MultimodalRestorer.from_language_model(
        lm, ImageEncoderConfig(dim=48, channels=(8, 16)), GlyphDecoderConfig(dim=48, base_channels=16)
    )


class TestRestorerTraining:
    def test_short_run_contracts(self, tiny_restorer_setup, tiny_vocab, tiny_codec, tmp_path):
        train, dev, lm, sim = tiny_restorer_setup
        model = _fresh_restorer(lm)
        cfg = TrainConfig(alpha=100.0, batch_size=64, epochs=2, curriculum_epochs=2, lr0=1e-3, lr_final=1e-4, seed=0)
        result = train_restorer(model, sim, train, dev, tiny_vocab, tiny_codec, cfg, out_dir=tmp_path)
        # frozen context encoder: checksum unchanged
        assert result.checksum_before == result.checksum_after
        # loss composition identity on every logged step
        steps = [json.loads(line) for line in (tmp_path / "metrics.jsonl").read_text().splitlines()]
        assert steps
        for rec in steps:
            assert rec["total"] == pytest.approx(100.0 * rec["loss_res"] + rec["loss_pred"], rel=1e-9)
        assert result.best_state and result.final_state

    def test_alpha_zero_head_is_inert(self, tiny_restorer_setup, tiny_vocab, tiny_codec, tmp_path):
        train, dev, lm, sim = tiny_restorer_setup
        cfg = TrainConfig(alpha=0.0, batch_size=64, epochs=2, curriculum_epochs=1, lr0=1e-3, lr_final=1e-4, seed=0)
        model_a = _fresh_restorer(lm)
        model_b = copy.deepcopy(model_a)
        decoder_before = copy.deepcopy(model_a.glyph_decoder.state_dict())
        res_a = train_restorer(model_a, sim, train, dev, tiny_vocab, tiny_codec, cfg, out_dir=tmp_path / "a")
        # decoder params untouched by alpha=0 training
        for k, v in model_a.glyph_decoder.state_dict().items():
            assert torch.equal(v, decoder_before[k])
        # removing the head entirely gives the identical loss curve
        model_b.glyph_decoder = None
        res_b = train_restorer(model_b, sim, train, dev, tiny_vocab, tiny_codec, cfg, out_dir=tmp_path / "b")
        assert res_a.history["epoch_loss"] == res_b.history["epoch_loss"]

    def test_seeded_run_bit_reproducible(self, tiny_restorer_setup, tiny_vocab, tiny_codec, tmp_path):
        train, dev, lm, sim = tiny_restorer_setup
        cfg = TrainConfig(alpha=50.0, batch_size=64, epochs=2, curriculum_epochs=2, lr0=1e-3, lr_final=1e-4, seed=5)
        model_a = _fresh_restorer(lm)
        model_b = copy.deepcopy(model_a)
        res_a = train_restorer(model_a, sim, train, dev, tiny_vocab, tiny_codec, cfg, out_dir=tmp_path / "a")
        res_b = train_restorer(model_b, sim, train, dev, tiny_vocab, tiny_codec, cfg, out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "metrics.jsonl").read_bytes() == (tmp_path / "b" / "metrics.jsonl").read_bytes()
        for k in res_a.final_state:
            assert torch.equal(res_a.final_state[k], res_b.final_state[k])
        assert res_a.history["dev_accuracy"] == res_b.history["dev_accuracy"]

    def test_curriculum_damage_grows_through_horizon(self, tiny_restorer_setup, tiny_vocab, tiny_codec):
        train, dev, lm, sim = tiny_restorer_setup
        cfg = TrainConfig(alpha=0.0, batch_size=64, epochs=4, curriculum_epochs=4, lr0=1e-3, lr_final=1e-4, seed=2)
        model = _fresh_restorer(lm)
        res = train_restorer(model, sim, train[:64], dev, tiny_vocab, tiny_codec, cfg)
        fractions = res.history["damaged_fraction"]
        assert fractions[0] < fractions[-1]

    def test_lr_schedule_defaults_end_below_bound(self):
        cfg = TrainConfig()
        assert epoch_lr(cfg, 1) == cfg.lr0
        assert epoch_lr(cfg, cfg.epochs) == pytest.approx(cfg.lr_final, rel=1e-9)
        assert epoch_lr(cfg, cfg.epochs) < 1e-5
        # smooth exponential: constant per-epoch ratio
        r1 = epoch_lr(cfg, 2) / epoch_lr(cfg, 1)
        r2 = epoch_lr(cfg, 17) / epoch_lr(cfg, 16)
        assert r1 == pytest.approx(r2, rel=1e-9)

    def test_config_invariants(self):
        with pytest.raises(ValueError, match="curriculum"):
            TrainConfig(curriculum_epochs=40, epochs=30)
        with pytest.raises(ValueError, match="lr_final"):
            TrainConfig(lr0=1e-5, lr_final=1e-4)
        with pytest.raises(ValueError, match="alpha"):
            TrainConfig(alpha=-1.0)
