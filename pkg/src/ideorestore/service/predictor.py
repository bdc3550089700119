"""Candidate ranking for session gaps.

The multimodal path (an image is attached and the damage level is below
IV) runs the restoration model and also returns its reconstructed glyph;
gaps with no usable visual information fall back to the finetuned language
model. Each candidate additionally carries a clean font render for visual
comparison in review tools.
"""

from __future__ import annotations

import numpy as np
import torch

from ..corpus.masking import MaskedSample
from ..corpus.vocabulary import Vocabulary
from ..glyphsim.simulate import GlyphSimulator
from ..model.codec import TokenCodec
from ..model.context_encoder import MaskedLanguageModel
from ..model.restorer import MultimodalRestorer
from .sessions import TEXT_ONLY_LEVEL, CandidateEntry, CandidateList, Gap, RestorationSession


class GapPredictor:
    def __init__(
        self,
        restorer: MultimodalRestorer,
        lm: MaskedLanguageModel | None,
        vocab: Vocabulary,
        codec: TokenCodec,
        simulator: GlyphSimulator | None = None,
    ):
        self.restorer = restorer
        self.lm = lm
        self.vocab = vocab
        self.codec = codec
        self.simulator = simulator

    def knows(self, char: str) -> bool:
        return char in self.vocab

    def _sample_for(self, session: RestorationSession, position: int) -> MaskedSample:
        # other open gaps stay as markers in the context; committed ones
        # are already substituted
        return MaskedSample(
            sentence_id=session.id,
            masked_positions=(position,),
            targets=(self.vocab.mask_symbol,),
            context=session.current_context(),
        )

    @torch.no_grad()
    def candidates(self, session: RestorationSession, position: int, top_n: int = 20) -> CandidateList:
        gap = session.gap(position)
        if gap.committed_char is not None:
            raise ValueError(f"gap {position} already committed")
        sample = self._sample_for(session, position)
        multimodal = gap.image is not None and gap.damage_level != TEXT_ONLY_LEVEL
        restored = None
        if multimodal:
            out = self.restorer.predict_sample(self.codec, sample, [gap.image], decode_images=True)[0]
            logits = out.logits
            restored = out.restored
            modality = "multimodal"
        elif self.lm is not None:
            tokens = torch.from_numpy(self.codec.encode(sample.context)).unsqueeze(0)
            index = torch.tensor([[0, position]], dtype=torch.int64)
            self.lm.eval()
            logits = self.lm.logits_at(tokens, None, index)[0].numpy()
            modality = "text-only"
        else:
            out = self.restorer.predict_sample(self.codec, sample, None, decode_images=False)[0]
            logits = out.logits
            modality = "text-only"
        cand_ids = self.codec.candidate_ids
        cand_logits = logits[cand_ids].astype(np.float64)
        probs = np.exp(cand_logits - cand_logits.max())
        probs = probs / probs.sum()
        # descending probability, ascending codepoint on ties
        order = np.lexsort((cand_ids, -probs))[:top_n]
        entries = []
        for j in order:
            char = self.codec.id_char(int(cand_ids[j]))
            glyph = None
            if self.simulator is not None and self.simulator.can_render(char):
                font = self.simulator.fonts.fonts_for(char)[0]
                glyph = self.simulator.render_clean(char, font)
            entries.append(
                CandidateEntry(char=char, score=float(cand_logits[j]), probability=float(probs[j]), glyph=glyph)
            )
        return CandidateList(position=position, entries=entries, modality_used=modality, restored=restored)
