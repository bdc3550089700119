"""Line-delimited dataset manifest: one JSON record per sentence."""

from __future__ import annotations

import json
from pathlib import Path

from .segmentation import Sentence


def write_manifest(sentences: list[Sentence], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for s in sentences:
            rec = {"id": s.id, "split": s.split, "text_model": s.text_model, "text_glyph": s.text_glyph}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_manifest(path: str | Path, split: str | None = None) -> list[Sentence]:
    path = Path(path)
    out: list[Sentence] = []
    with path.open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            s = Sentence(
                id=rec["id"],
                text_model=rec["text_model"],
                text_glyph=rec["text_glyph"],
                split=rec["split"],
            )
            if split is None or s.split == split:
                out.append(s)
    return out
