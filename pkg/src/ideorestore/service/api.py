"""HTTP JSON API for interactive restoration, versioned under /v1.

Sessions are independent; per-session operations are serialized by the
store lock; the model snapshot is shared read-only. Errors come back as
structured {code, message} bodies.
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..glyphsim.image import to_png_bytes
from .predictor import GapPredictor
from .preprocess import ImageDecodeError, preprocess_image
from .sessions import (
    DAMAGE_LEVELS,
    CandidateList,
    GapLockedError,
    SessionStore,
    UnknownGapError,
    UnknownSessionError,
)


class CreateSessionBody(BaseModel):
    context: str
    checkpoint_ref: str = "default"


class SetContextBody(BaseModel):
    context: str


class UploadImageBody(BaseModel):
    image_png_base64: str
    seal_rects: list[list[float]] | None = None
    invert: bool = False
    damage_level: str = Field(default="II")


class PredictBody(BaseModel):
    top_n: int = 20


class CommitBody(BaseModel):
    char: str


def _b64png(img: np.ndarray | None) -> str | None:
    if img is None:
        return None
    return base64.b64encode(to_png_bytes(img)).decode("ascii")


def _candidates_json(cl: CandidateList) -> dict:
    return {
        "position": cl.position,
        "modality_used": cl.modality_used,
        "restored_png_base64": _b64png(cl.restored),
        "entries": [
            {
                "char": e.char,
                "score": e.score,
                "probability": e.probability,
                "glyph_png_base64": _b64png(e.glyph),
            }
            for e in cl.entries
        ],
    }


def create_app(
    store: SessionStore,
    predictors: dict[str, GapPredictor],
    default_ref: str = "default",
) -> FastAPI:
    app = FastAPI(title="ideorestore service", version="1")

    def predictor_for(ref: str) -> GapPredictor:
        if ref not in predictors:
            raise UnknownSessionError(f"unknown checkpoint ref {ref!r}")
        return predictors[ref]

    @app.exception_handler(UnknownSessionError)
    @app.exception_handler(UnknownGapError)
    async def _not_found(request: Request, exc: Exception):
        return JSONResponse(status_code=404, content={"code": "not_found", "message": str(exc)})

    @app.exception_handler(GapLockedError)
    async def _locked(request: Request, exc: Exception):
        return JSONResponse(status_code=409, content={"code": "gap_locked", "message": str(exc)})

    @app.exception_handler(ImageDecodeError)
    async def _bad_image(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={"code": "bad_image", "message": str(exc)})

    @app.exception_handler(ValueError)
    async def _bad_request(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={"code": "invalid", "message": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "checkpoints": sorted(predictors)}

    @app.get("/v1/vocab")
    def vocab(ref: str = "default"):
        p = predictor_for(ref)
        return {
            "mask_symbol": p.vocab.mask_symbol,
            "characters": [p.codec.id_char(int(i)) for i in p.codec.candidate_ids],
        }

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody):
        ref = body.checkpoint_ref or default_ref
        predictor_for(ref)
        marker = predictors[ref].vocab.mask_symbol
        session = store.create(body.context, ref, marker)
        return session.to_dict()

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        return store.get(sid).to_dict()

    @app.delete("/v1/sessions/{sid}")
    def delete_session(sid: str):
        store.delete(sid)
        return {"ok": True}

    @app.put("/v1/sessions/{sid}/context")
    def set_context(sid: str, body: SetContextBody):
        session = store.get(sid)
        if session.audit:
            raise GapLockedError("context cannot change after commits; create a new session")
        marker = session.marker
        store.delete(sid)
        fresh = store.create(body.context, session.checkpoint_ref, marker)
        return fresh.to_dict()

    @app.post("/v1/sessions/{sid}/gaps/{position}/image")
    def upload_image(sid: str, position: int, body: UploadImageBody):
        session = store.get(sid)
        if body.damage_level not in DAMAGE_LEVELS:
            raise ValueError(f"unknown damage level {body.damage_level!r}")
        raw = base64.b64decode(body.image_png_base64)
        rects = [tuple(r) for r in body.seal_rects] if body.seal_rects else None
        img = preprocess_image(raw, seal_regions=rects, invert=body.invert)
        session.set_image(position, img, body.damage_level)
        store.save()
        return {"position": position, "preview_png_base64": _b64png(img)}

    @app.post("/v1/sessions/{sid}/gaps/{position}/predict")
    def predict(sid: str, position: int, body: PredictBody | None = None):
        session = store.get(sid)
        top_n = body.top_n if body else 20
        cl = predictor_for(session.checkpoint_ref).candidates(session, position, top_n)
        return _candidates_json(cl)

    @app.post("/v1/sessions/{sid}/gaps/{position}/commit")
    def commit(sid: str, position: int, body: CommitBody):
        session = store.get(sid)
        if not predictor_for(session.checkpoint_ref).knows(body.char):
            raise ValueError(f"character {body.char!r} not in the vocabulary")
        session.commit(position, body.char)
        store.save()
        return session.to_dict()

    @app.post("/v1/sessions/{sid}/gaps/{position}/uncommit")
    def uncommit(sid: str, position: int):
        session = store.get(sid)
        session.uncommit(position)
        store.save()
        return session.to_dict()

    @app.get("/v1/sessions/{sid}/report")
    def report(sid: str):
        session = store.get(sid)
        return {
            "id": session.id,
            "context": session.current_context(),
            "base_context": session.base_context,
            "gaps": session.to_dict(include_images=False)["gaps"],
            "audit": [e.as_dict() for e in session.audit],
        }

    return app
