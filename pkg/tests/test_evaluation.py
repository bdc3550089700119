import math
from fractions import Fraction

import numpy as np
import pytest

from ideorestore.evaluation import (
    MetricSummary,
    evaluate,
    format_report_table,
    mask_area_sweep,
    multi_mask_table,
    rank_of_truth,
    rank_to_metrics,
)
from ideorestore.evaluation.metrics import rank_positions


def brute_force_metrics(ranks):
    """Independent loop oracle: counts plus correctly rounded reciprocal sum."""
    n = len(ranks)
    acc = sum(1 for r in ranks if r == 1)
    h5 = sum(1 for r in ranks if r <= 5)
    h10 = sum(1 for r in ranks if r <= 10)
    h20 = sum(1 for r in ranks if r <= 20)
    recips = []
    for r in ranks:
        recips.append(1.0 / r)
    mrr = 100.0 * math.fsum(recips) / n
    return (100.0 * acc / n, 100.0 * h5 / n, 100.0 * h10 / n, 100.0 * h20 / n, mrr)


class TestRankToMetrics:
    def test_all_rank_one(self):
        m = rank_to_metrics([1, 1, 1])
        assert m.accuracy == 100.0 and m.mrr == 100.0 and m.hits20 == 100.0

    def test_mixed_example(self):
        m = rank_to_metrics([1, 2, 4])
        assert m.accuracy == pytest.approx(33.3333, abs=0.01)
        assert m.hits5 == 100.0
        assert m.mrr == pytest.approx((1 + 0.5 + 0.25) / 3 * 100, abs=1e-9)
        assert m.mrr == pytest.approx(58.3333, abs=0.01)

    def test_matches_brute_force_exactly_on_fuzz(self):
        rng = np.random.default_rng(0)
        for trial in range(200):
            n = int(rng.integers(1, 60))
            ranks = rng.integers(1, 200, size=n)
            m = rank_to_metrics(ranks)
            oracle = brute_force_metrics(ranks.tolist())
            assert (m.accuracy, m.hits5, m.hits10, m.hits20, m.mrr) == oracle

    def test_monotone_chain_always_holds(self):
        rng = np.random.default_rng(1)
        for trial in range(300):
            ranks = rng.integers(1, 50, size=int(rng.integers(1, 40)))
            m = rank_to_metrics(ranks)
            assert m.accuracy <= m.hits5 <= m.hits10 <= m.hits20

    def test_empty_and_invalid(self):
        with pytest.raises(ValueError, match="no ranks"):
            rank_to_metrics([])
        with pytest.raises(ValueError, match="1-based"):
            rank_to_metrics([0, 1])

    def test_chain_violation_rejected(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            MetricSummary(accuracy=50.0, hits5=40.0, hits10=60.0, hits20=70.0, mrr=50.0)


class TestRankOfTruth:
    def test_basic_ranking(self):
        scores = np.array([0.0, 5.0, 3.0, 4.0, 1.0])
        cands = np.array([1, 2, 3, 4])
        assert rank_of_truth(scores, 1, cands) == 1
        assert rank_of_truth(scores, 3, cands) == 2
        assert rank_of_truth(scores, 4, cands) == 4

    def test_ties_break_by_ascending_id(self):
        scores = np.array([0.0, 2.0, 2.0, 2.0])
        cands = np.array([1, 2, 3])
        assert rank_of_truth(scores, 1, cands) == 1
        assert rank_of_truth(scores, 2, cands) == 2
        assert rank_of_truth(scores, 3, cands) == 3

    def test_truth_not_candidate(self):
        with pytest.raises(ValueError, match="not in the candidate set"):
            rank_of_truth(np.zeros(5), 0, np.array([1, 2]))

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(2)
        cands = np.arange(3, 40)
        scores = rng.normal(size=(30, 40))
        # quantized scores force plenty of ties
        scores = np.round(scores, 1)
        truths = rng.integers(3, 40, size=30)
        vec = rank_positions(scores, truths, cands)
        for i in range(30):
            assert vec[i] == rank_of_truth(scores[i], int(truths[i]), cands)


class _OraclePredictor:
    """Scores peeked from the batch labels; used to pin protocol behavior."""

    needs_images = False

    def __init__(self, vocab_size, noise_seed=None):
        self.vocab_size = vocab_size
        self.noise_seed = noise_seed

    def scores(self, batch, images, keep):
        labels = batch.labels[keep]
        out = np.zeros((len(labels), self.vocab_size), dtype=np.float32)
        out[np.arange(len(labels)), labels] = 10.0
        if self.noise_seed is not None:
            out = out + np.random.default_rng(self.noise_seed).normal(scale=4.0, size=out.shape)
        return out


class TestEvaluateProtocol:
    def test_perfect_oracle_scores_100(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        report = evaluate(_OraclePredictor(tiny_codec.vocab_size), test, tiny_vocab, tiny_codec, None, resamples=3, seed=0)
        assert report.mean.accuracy == 100.0
        assert report.mean.mrr == 100.0
        assert report.std["accuracy"] == 0.0

    def test_same_seed_identical_reports(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        p = _OraclePredictor(tiny_codec.vocab_size, noise_seed=3)
        a = evaluate(p, test, tiny_vocab, tiny_codec, None, n_masks="random_1_5", resamples=4, seed=11)
        b = evaluate(p, test, tiny_vocab, tiny_codec, None, n_masks="random_1_5", resamples=4, seed=11)
        assert a.as_dict() == b.as_dict()

    def test_resamples_one_equals_direct_pass(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        p = _OraclePredictor(tiny_codec.vocab_size, noise_seed=5)
        r = evaluate(p, test, tiny_vocab, tiny_codec, None, resamples=1, seed=2)
        assert r.n_resamples == 1
        assert r.mean == r.per_resample[0]

    def test_std_reported_across_resamples(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        p = _OraclePredictor(tiny_codec.vocab_size, noise_seed=5)
        r = evaluate(p, test, tiny_vocab, tiny_codec, None, n_masks="random_1_5", resamples=5, seed=2)
        assert set(r.std) == {"accuracy", "hits5", "hits10", "hits20", "mrr"}
        assert r.std["accuracy"] > 0.0  # resampled masks change the noisy oracle's hits

    def test_per_mask_count_breakdown(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        p = _OraclePredictor(tiny_codec.vocab_size)
        r = evaluate(p, test, tiny_vocab, tiny_codec, None, n_masks="random_1_5", resamples=2, seed=4)
        assert set(r.per_mask_count) <= {1, 2, 3, 4, 5}
        assert len(r.per_mask_count) >= 2

    def test_empty_split_error(self, tiny_vocab, tiny_codec):
        with pytest.raises(ValueError, match="empty"):
            evaluate(_OraclePredictor(tiny_codec.vocab_size), [], tiny_vocab, tiny_codec, None)

    def test_multi_mask_row_one_matches_single_mask_evaluate(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        p = _OraclePredictor(tiny_codec.vocab_size, noise_seed=9)
        table = multi_mask_table(p, test, tiny_vocab, tiny_codec, None, resamples=2, seed=6)
        direct = evaluate(p, test, tiny_vocab, tiny_codec, None, n_masks=1, resamples=2, seed=6)
        assert table["1"].as_dict() == direct.as_dict()
        assert set(table) == {"R", "1", "2", "3", "4", "5"}

    def test_report_table_format(self, tiny_corpus, tiny_vocab, tiny_codec):
        test = [s for s in tiny_corpus if s.split == "test"]
        r = evaluate(_OraclePredictor(tiny_codec.vocab_size), test, tiny_vocab, tiny_codec, None, resamples=1, seed=0)
        text = format_report_table({"oracle": r})
        assert "oracle\t100.00\t100.00\t100.00\t100.00\t100.00" in text


class TestMaskAreaSweep:
    def test_fraction_zero_is_maximal_and_reference_present(self, tiny_corpus, tiny_vocab, tiny_codec, simulator):
        test = [s for s in tiny_corpus if s.split == "test"][:10]
        p = _OraclePredictor(tiny_codec.vocab_size, noise_seed=1)

        class ImgOracle(_OraclePredictor):
            needs_images = True

        pi = ImgOracle(tiny_codec.vocab_size, noise_seed=1)
        result = mask_area_sweep(pi, p, test, tiny_vocab, tiny_codec, simulator, fractions=(0.0, 0.5, 1.0), resamples=1, seed=3)
        assert [f for f, _ in result.points] == [0.0, 0.5, 1.0]
        assert result.lm_reference > 0
