import logging
import math

import numpy as np
import pytest
from scipy import stats

from ideorestore.corpus import (
    EmptyCorpusError,
    Sentence,
    SentenceTooShortError,
    TransliterationTable,
    build_vocabulary,
    read_manifest,
    read_vocabulary,
    sample_masks,
    segment_corpus,
    write_manifest,
    write_vocabulary,
)


class TestSegmentation:
    def test_punctuated_sentence_kept_whole(self):
        text = "天地玄黃宇宙洪荒日月盈昃辰。"  # 13 chars + period = 14
        out = segment_corpus(text)
        assert len(out) == 1
        assert len(out[0]) == 14

    def test_boundaries_at_punctuation(self):
        out = segment_corpus("甲乙丙。丁戊！己庚？")
        assert [s.text_glyph for s in out] == ["甲乙丙。", "丁戊！", "己庚？"]

    def test_overlong_split_at_midpoint(self):
        out = segment_corpus("甲" * 80 + "。")
        assert len(out) == 2
        assert all(len(s) <= 50 for s in out)
        assert "".join(s.text_glyph for s in out) == "甲" * 80 + "。"

    def test_overlong_split_prefers_center_punctuation(self):
        text = "甲" * 30 + "，" + "乙" * 29 + "。"
        out = segment_corpus(text, max_len=50)
        assert [s.text_glyph for s in out] == ["甲" * 30 + "，", "乙" * 29 + "。"]

    def test_empty_stream(self):
        assert segment_corpus("") == []
        assert segment_corpus("  \n\n  ") == []

    def test_idempotence(self, tiny_language):
        raw = "".join(tiny_language.documents(50))
        once = segment_corpus(raw)
        again = segment_corpus("\n".join(s.text_glyph for s in once))
        assert [s.text_glyph for s in again] == [s.text_glyph for s in once]

    def test_all_outputs_within_cap(self, tiny_language):
        raw = "".join(tiny_language.documents(80))
        for s in segment_corpus(raw, max_len=20):
            assert 1 <= len(s) <= 20

    def test_transliteration_applied(self):
        table = TransliterationTable({"甲": "a", "乙": "b", "。": "。"})
        out = segment_corpus("甲乙。", table=table)
        assert out[0].text_model == "ab。"
        assert out[0].text_glyph == "甲乙。"

    def test_missing_table_char_maps_to_itself_with_warning(self, caplog):
        table = TransliterationTable({"甲": "a"})
        with caplog.at_level(logging.WARNING):
            out = segment_corpus("甲乙。", table=table)
        assert out[0].text_model == "a乙。"
        assert "乙" in caplog.text

    def test_script_lengths_aligned(self):
        with pytest.raises(ValueError):
            Sentence(id="x", text_model="ab", text_glyph="abc")


class TestVocabulary:
    def _sentences(self, text):
        return [Sentence(id="s", text_model=text, text_glyph=text)]

    def test_weights_clamp_below_average(self):
        # counts 甲:4, 乙:1, 丙:1 -> avg 2; below-average counts clamp to avg
        v = build_vocabulary(self._sentences("甲甲甲甲乙丙"))
        assert v.avg_count == 2.0
        assert v.weights["甲"] == 0.5
        assert v.weights["乙"] == pytest.approx(math.sqrt(1 / 2), abs=1e-12)
        assert v.weights["丙"] == pytest.approx(math.sqrt(1 / 2), abs=1e-12)

    def test_equal_counts_equal_weights(self):
        v = build_vocabulary(self._sentences("甲甲乙乙丙丙"))
        assert set(v.weights.values()) == {math.sqrt(1 / 2)}

    def test_single_character_corpus(self):
        v = build_vocabulary(self._sentences("天天天"))
        assert v.counts == {"天": 3}
        assert v.weights["天"] == math.sqrt(1 / 3)

    def test_clamp_exact_for_all_below_average(self, tiny_corpus):
        v = build_vocabulary(tiny_corpus)
        for ch, n in v.counts.items():
            if n <= v.avg_count:
                assert v.weights[ch] == math.sqrt(1.0 / v.avg_count)
            else:
                assert v.weights[ch] == math.sqrt(1.0 / n)

    def test_empty_corpus_error(self):
        with pytest.raises(EmptyCorpusError, match="empty corpus"):
            build_vocabulary([])

    def test_counts_only_over_train_split(self):
        s_train = Sentence(id="a", text_model="甲甲", text_glyph="甲甲", split="train")
        s_test = Sentence(id="b", text_model="乙乙", text_glyph="乙乙", split="test")
        v = build_vocabulary([s_train, s_test])
        assert "乙" not in v.counts

    def test_file_roundtrip_bit_exact(self, tmp_path, tiny_corpus):
        v = build_vocabulary(tiny_corpus)
        p1 = tmp_path / "v1.tsv"
        p2 = tmp_path / "v2.tsv"
        write_vocabulary(v, p1)
        v2 = read_vocabulary(p1)
        write_vocabulary(v2, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert v2.weights == v.weights
        assert v2.counts == v.counts


class TestMasking:
    def test_single_char_sentence_masked_with_probability_one(self):
        s = Sentence(id="s", text_model="甲", text_glyph="甲")
        v = build_vocabulary([s])
        for seed in range(5):
            ms = sample_masks(s, v, 1, np.random.default_rng(seed))
            assert ms.masked_positions == (0,)
            assert ms.targets == ("甲",)
            assert ms.context == v.mask_symbol

    def test_too_many_masks_error(self):
        s = Sentence(id="s", text_model="甲乙", text_glyph="甲乙")
        v = build_vocabulary([s])
        with pytest.raises(SentenceTooShortError, match="too short"):
            sample_masks(s, v, 3, np.random.default_rng(0))

    def test_punctuation_not_maskable(self):
        s = Sentence(id="s", text_model="甲。", text_glyph="甲。")
        v = build_vocabulary([s])
        for seed in range(5):
            ms = sample_masks(s, v, 1, np.random.default_rng(seed))
            assert ms.masked_positions == (0,)

    def test_reproducible_given_seed(self, tiny_corpus, tiny_vocab):
        s = max(tiny_corpus, key=len)
        a = sample_masks(s, tiny_vocab, "random_1_5", np.random.default_rng(42))
        b = sample_masks(s, tiny_vocab, "random_1_5", np.random.default_rng(42))
        assert a == b

    def test_context_differs_exactly_at_masked_positions(self, tiny_corpus, tiny_vocab):
        rng = np.random.default_rng(1)
        for s in tiny_corpus[:50]:
            ms = sample_masks(s, tiny_vocab, "random_1_5", rng)
            diffs = [i for i, (a, b) in enumerate(zip(ms.context, s.text_model)) if a != b]
            assert tuple(diffs) == ms.masked_positions
            assert all(ms.context[i] == tiny_vocab.mask_symbol for i in ms.masked_positions)

    def test_uniform_weights_position_distribution(self):
        # 10 distinct characters, equal counts -> equal weights -> uniform positions
        text = "甲乙丙丁戊己庚辛壬癸"
        s = Sentence(id="s", text_model=text, text_glyph=text)
        v = build_vocabulary([s])
        rng = np.random.default_rng(7)
        n = 100_000
        counts = np.zeros(10, dtype=np.int64)
        for _ in range(n):
            ms = sample_masks(s, v, 1, rng)
            counts[ms.masked_positions[0]] += 1
        assert stats.chisquare(counts).pvalue > 0.01

    def test_weight_proportional_sampling(self):
        # counts 甲:4 乙:16 (both above avg) -> weights 1/2 and 1/4, so
        # position of 甲 should be drawn twice as often
        filler = "丙丁戊己庚"
        corpus_text = "甲" * 4 + "乙" * 16 + filler
        v = build_vocabulary([Sentence(id="c", text_model=corpus_text, text_glyph=corpus_text)])
        assert v.weights["甲"] == 0.5 and v.weights["乙"] == 0.25
        s = Sentence(id="s", text_model="甲乙", text_glyph="甲乙")
        rng = np.random.default_rng(3)
        n = 100_000
        hits0 = 0
        for _ in range(n):
            ms = sample_masks(s, v, 1, rng)
            hits0 += ms.masked_positions[0] == 0
        assert hits0 / n == pytest.approx(2 / 3, abs=0.01)

    def test_unseen_character_gets_default_weight(self, tiny_vocab):
        assert tiny_vocab.weight("\U0001F600") == tiny_vocab.default_weight
        assert tiny_vocab.default_weight == math.sqrt(1 / tiny_vocab.avg_count)


class TestManifest:
    def test_roundtrip(self, tmp_path, tiny_corpus):
        p = tmp_path / "m.jsonl"
        write_manifest(tiny_corpus, p)
        back = read_manifest(p)
        assert back == tiny_corpus

    def test_split_filter(self, tmp_path, tiny_corpus):
        p = tmp_path / "m.jsonl"
        write_manifest(tiny_corpus, p)
        dev = read_manifest(p, split="dev")
        assert len(dev) == 30
        assert all(s.split == "dev" for s in dev)
