from .preprocess import preprocess_image
from .sessions import (
    AuditEntry,
    CandidateEntry,
    CandidateList,
    Gap,
    GapLockedError,
    RestorationSession,
    SessionStore,
    UnknownGapError,
    UnknownSessionError,
    replay_audit,
)
from .predictor import GapPredictor
from .api import create_app

__all__ = [
    "preprocess_image",
    "AuditEntry",
    "CandidateEntry",
    "CandidateList",
    "Gap",
    "GapLockedError",
    "RestorationSession",
    "SessionStore",
    "UnknownGapError",
    "UnknownSessionError",
    "replay_audit",
    "GapPredictor",
    "create_app",
]
