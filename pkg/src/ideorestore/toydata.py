"""Synthetic ideograph-style corpus for desk-scale experiments.

Real classical corpora and wide font sets are not redistributable here, so
desk-scale runs synthesize a language with the two properties the task
needs: context must narrow the candidate set without pinning it down, and
the glyph image must resolve the remainder. Characters are grouped into
classes; a Markov chain over classes generates sentences and the concrete
character is drawn Zipf-wise within its class. Context at best identifies
the class (a dozen-odd characters); the rendered glyph distinguishes
within it.

Characters are taken from the letters every font in the configured library
covers, so any corpus produced here is fully renderable.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .glyphsim.render import FontLibrary
from .rand import rng_for


@dataclass(frozen=True)
class ToyLanguageSpec:
    n_chars: int = 520
    n_classes: int = 40
    successors_per_class: int = 4
    transition_sharpness: float = 0.6  # Dirichlet concentration; lower = more peaked
    zipf_exponent: float = 1.0
    sentence_len: tuple[int, int] = (6, 18)
    period: str = "."
    comma: str = ","
    comma_prob: float = 0.08
    seed: int = 0


def covered_letters(fonts: FontLibrary, n: int, seed: int = 0) -> list[str]:
    """n visually distinct letters covered by every font (seeded selection).

    Cross-script homoglyphs (Latin A / Greek Alpha / Cyrillic A and the
    like) render identically, which would give one glyph two labels; each
    candidate render is compared against the kept set per font and dropped
    on a near-duplicate in any font.
    """
    common = fonts.common_codepoints()
    pool = sorted(
        chr(cp)
        for cp in common
        if cp < 0x3000 and unicodedata.category(chr(cp)).startswith("L")
    )
    order = rng_for(seed, 0xC0DE).permutation(len(pool))
    candidates = [pool[i] for i in order.tolist()]
    kept: list[str] = []
    kept_sigs = [np.zeros((0, 256), dtype=np.float32) for _ in fonts.fonts]
    for ch in candidates:
        sigs = [_glyph_signature(ch, f) for f in fonts.fonts]
        if any(s.mean() < 0.005 for s in sigs):  # near-blank render
            continue
        dup = False
        for fi, s in enumerate(sigs):
            if kept_sigs[fi].shape[0] and np.abs(kept_sigs[fi] - s).mean(axis=1).min() < 0.02:
                dup = True
                break
        if dup:
            continue
        kept.append(ch)
        for fi, s in enumerate(sigs):
            kept_sigs[fi] = np.vstack([kept_sigs[fi], s[None, :]])
        if len(kept) == n:
            break
    if len(kept) < n:
        raise ValueError(f"fonts cover only {len(kept)} distinct common letters, need {n}")
    return sorted(kept)


def _glyph_signature(char: str, font) -> np.ndarray:
    """16x16 block-mean ink map of the render, flattened."""
    from .glyphsim.render import render_glyph

    img = 1.0 - render_glyph(char, font)
    return img.reshape(16, 4, 16, 4).mean(axis=(1, 3)).reshape(-1).astype(np.float32)


class ToyLanguage:
    def __init__(self, spec: ToyLanguageSpec, chars: list[str]):
        if len(chars) != spec.n_chars:
            raise ValueError(f"expected {spec.n_chars} characters, got {len(chars)}")
        if spec.n_chars % spec.n_classes != 0:
            raise ValueError("n_chars must be a multiple of n_classes")
        self.spec = spec
        self.chars = list(chars)
        rng = rng_for(spec.seed, 0x70B1)
        shuffled = list(self.chars)
        rng.shuffle(shuffled)
        per = spec.n_chars // spec.n_classes
        self.class_members = [shuffled[i * per : (i + 1) * per] for i in range(spec.n_classes)]
        # Zipf weights inside a class: the chain picks the class, the
        # character stays ambiguous given context alone.
        w = 1.0 / np.arange(1, per + 1) ** spec.zipf_exponent
        self.member_probs = w / w.sum()
        # sparse class-to-class transitions with random preference weights
        self.successors = []
        self.successor_probs = []
        for _ in range(spec.n_classes):
            succ = rng.choice(spec.n_classes, size=spec.successors_per_class, replace=False)
            probs = rng.dirichlet(np.ones(spec.successors_per_class) * spec.transition_sharpness)
            self.successors.append(succ)
            self.successor_probs.append(probs)

    def sentence(self, rng: np.random.Generator) -> str:
        lo, hi = self.spec.sentence_len
        length = int(rng.integers(lo, hi + 1))
        cls = int(rng.integers(self.spec.n_classes))
        out: list[str] = []
        for i in range(length):
            members = self.class_members[cls]
            out.append(members[int(rng.choice(len(members), p=self.member_probs))])
            if i < length - 1 and rng.random() < self.spec.comma_prob:
                out.append(self.spec.comma)
            cls = int(self.successors[cls][int(rng.choice(self.spec.successors_per_class, p=self.successor_probs[cls]))])
        out.append(self.spec.period)
        return "".join(out)

    def documents(self, n_sentences: int, sentences_per_doc: int = 50) -> list[str]:
        rng = rng_for(self.spec.seed, 0xD0C5)
        docs = []
        buf = []
        for _ in range(n_sentences):
            buf.append(self.sentence(rng))
            if len(buf) >= sentences_per_doc:
                docs.append("".join(buf))
                buf = []
        if buf:
            docs.append("".join(buf))
        return docs


def write_toy_corpus(
    out_dir: str | Path,
    fonts: FontLibrary,
    spec: ToyLanguageSpec,
    n_sentences: int,
) -> list[Path]:
    """Write raw corpus documents (one UTF-8 file each) and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
    lang = ToyLanguage(spec, chars)
    paths = []
    for i, doc in enumerate(lang.documents(n_sentences)):
        p = out_dir / f"doc{i:04d}.txt"
        p.write_text(doc, encoding="utf-8")
        paths.append(p)
    return paths
