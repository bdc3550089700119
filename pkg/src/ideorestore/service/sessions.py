"""Interactive restoration sessions.

A session wraps one passage under restoration: a character sequence with
gap markers, an optional preprocessed image and expert damage level per
gap, and an audit log of commit/uncommit actions. The visible context
always carries exactly one marker per uncommitted gap; committed gaps show
their chosen character, so later predictions condition on earlier
decisions. Replaying the audit log over the base context reproduces the
final state.
"""

from __future__ import annotations

import base64
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..glyphsim.image import from_png_bytes, to_png_bytes

DAMAGE_LEVELS = ("I", "II", "III", "IV")
TEXT_ONLY_LEVEL = "IV"  # no usable visual information
DEFAULT_GAP_MARKER = "□"


class UnknownSessionError(KeyError):
    pass


class UnknownGapError(KeyError):
    pass


class GapLockedError(ValueError):
    pass


@dataclass
class Gap:
    position: int
    damage_level: str = "II"
    image: np.ndarray | None = None
    committed_char: str | None = None

    def __post_init__(self):
        if self.damage_level not in DAMAGE_LEVELS:
            raise ValueError(f"unknown damage level {self.damage_level!r}")


@dataclass(frozen=True)
class AuditEntry:
    seq: int
    action: str  # commit | uncommit
    position: int
    char: str | None
    at: str

    def as_dict(self) -> dict:
        return {"seq": self.seq, "action": self.action, "position": self.position, "char": self.char, "at": self.at}


@dataclass(frozen=True)
class CandidateEntry:
    char: str
    score: float
    probability: float
    glyph: np.ndarray | None = None  # clean render of this candidate


@dataclass
class CandidateList:
    position: int
    entries: list[CandidateEntry]
    modality_used: str  # multimodal | text-only
    restored: np.ndarray | None = None  # decoder output (multimodal only)


class RestorationSession:
    def __init__(self, context: str, checkpoint_ref: str = "default", marker: str = DEFAULT_GAP_MARKER, session_id: str | None = None):
        if marker not in context:
            raise ValueError(f"context contains no gap marker {marker!r}")
        self.id = session_id or uuid.uuid4().hex[:12]
        self.marker = marker
        self.base_context = context
        self.checkpoint_ref = checkpoint_ref
        self.gaps: dict[int, Gap] = {i: Gap(position=i) for i, ch in enumerate(context) if ch == marker}
        self.audit: list[AuditEntry] = []

    def current_context(self) -> str:
        chars = list(self.base_context)
        for pos, gap in self.gaps.items():
            if gap.committed_char is not None:
                chars[pos] = gap.committed_char
        return "".join(chars)

    def gap(self, position: int) -> Gap:
        if position not in self.gaps:
            raise UnknownGapError(f"no gap at position {position}")
        return self.gaps[position]

    def open_positions(self) -> list[int]:
        return sorted(p for p, g in self.gaps.items() if g.committed_char is None)

    def set_image(self, position: int, image: np.ndarray | None, damage_level: str | None = None) -> None:
        gap = self.gap(position)
        gap.image = image
        if damage_level is not None:
            if damage_level not in DAMAGE_LEVELS:
                raise ValueError(f"unknown damage level {damage_level!r}")
            gap.damage_level = damage_level

    def _log(self, action: str, position: int, char: str | None) -> None:
        self.audit.append(
            AuditEntry(
                seq=len(self.audit) + 1,
                action=action,
                position=position,
                char=char,
                at=datetime.now(timezone.utc).isoformat(),
            )
        )

    def commit(self, position: int, char: str) -> None:
        gap = self.gap(position)
        if gap.committed_char is not None:
            raise GapLockedError(f"gap {position} locked: already committed {gap.committed_char!r}")
        if len(char) != 1:
            raise ValueError("committed choice must be a single character")
        gap.committed_char = char
        self._log("commit", position, char)

    def uncommit(self, position: int) -> None:
        gap = self.gap(position)
        if gap.committed_char is None:
            raise GapLockedError(f"gap {position} is not committed")
        gap.committed_char = None
        self._log("uncommit", position, None)

    def to_dict(self, include_images: bool = True) -> dict:
        gaps = []
        for pos in sorted(self.gaps):
            g = self.gaps[pos]
            rec = {
                "position": pos,
                "damage_level": g.damage_level,
                "committed_char": g.committed_char,
                "has_image": g.image is not None,
            }
            if include_images and g.image is not None:
                rec["image_png_base64"] = base64.b64encode(to_png_bytes(g.image)).decode("ascii")
            gaps.append(rec)
        return {
            "id": self.id,
            "marker": self.marker,
            "base_context": self.base_context,
            "context": self.current_context(),
            "checkpoint_ref": self.checkpoint_ref,
            "gaps": gaps,
            "audit": [e.as_dict() for e in self.audit],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RestorationSession":
        s = cls(d["base_context"], d.get("checkpoint_ref", "default"), d.get("marker", DEFAULT_GAP_MARKER), session_id=d["id"])
        for rec in d.get("gaps", []):
            gap = s.gap(rec["position"])
            gap.damage_level = rec.get("damage_level", "II")
            gap.committed_char = rec.get("committed_char")
            if rec.get("image_png_base64"):
                gap.image = from_png_bytes(base64.b64decode(rec["image_png_base64"]))
        s.audit = [AuditEntry(**e) for e in d.get("audit", [])]
        return s


def replay_audit(base_context: str, audit: list[AuditEntry], marker: str = DEFAULT_GAP_MARKER) -> str:
    """Re-apply the audit log to the base context; idempotent."""
    session = RestorationSession(base_context, marker=marker)
    for entry in sorted(audit, key=lambda e: e.seq):
        if entry.action == "commit":
            session.gap(entry.position).committed_char = entry.char
        elif entry.action == "uncommit":
            session.gap(entry.position).committed_char = None
        else:
            raise ValueError(f"unknown audit action {entry.action!r}")
    return session.current_context()


class SessionStore:
    """In-memory sessions with optional single-file persistence."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.sessions: dict[str, RestorationSession] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            for rec in data.get("sessions", []):
                s = RestorationSession.from_dict(rec)
                self.sessions[s.id] = s

    def create(self, context: str, checkpoint_ref: str = "default", marker: str = DEFAULT_GAP_MARKER) -> RestorationSession:
        with self._lock:
            s = RestorationSession(context, checkpoint_ref, marker)
            self.sessions[s.id] = s
            self._persist()
            return s

    def get(self, session_id: str) -> RestorationSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session_id}") from None

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self.sessions:
                raise UnknownSessionError(f"unknown session {session_id}")
            del self.sessions[session_id]
            self._persist()

    def save(self) -> None:
        with self._lock:
            self._persist()

    def _persist(self) -> None:
        if self.path is None:
            return
        payload = {"sessions": [s.to_dict(include_images=True) for s in self.sessions.values()]}
        self.path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
