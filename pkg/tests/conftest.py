import numpy as np
import pytest
import torch

from ideorestore.corpus import Sentence, assign_splits, build_vocabulary, segment_corpus
from ideorestore.glyphsim import FontLibrary, GlyphSimulator, SimulationConfig
from ideorestore.model import TokenCodec
from ideorestore.toydata import ToyLanguage, ToyLanguageSpec, covered_letters

FONT_DIR = "/usr/share/fonts/truetype/dejavu"


@pytest.fixture(scope="session")
def fonts():
    return FontLibrary.from_dir(FONT_DIR)


@pytest.fixture(scope="session")
def simulator(fonts):
    return GlyphSimulator(fonts, SimulationConfig())


@pytest.fixture(scope="session")
def tiny_language(fonts):
    spec = ToyLanguageSpec(n_chars=60, n_classes=6, sentence_len=(5, 12), seed=5)
    chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
    return ToyLanguage(spec, chars)


@pytest.fixture(scope="session")
def tiny_corpus(tiny_language):
    """Small segmented corpus with splits, for fast model/training tests."""
    raw = "\n".join(tiny_language.documents(320))
    sentences = segment_corpus(raw)
    sentences = assign_splits(sentences, dev_size=30, test_size=30, rng=np.random.default_rng(0))
    return sentences


@pytest.fixture(scope="session")
def tiny_vocab(tiny_corpus):
    return build_vocabulary(tiny_corpus)


@pytest.fixture(scope="session")
def tiny_codec(tiny_vocab):
    return TokenCodec.from_vocabulary(tiny_vocab)


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)
