"""HTTP face of the scorer.

POST /score takes {"premise": ..., "hypotheses": [...]} and returns
{"scores": [...], "truncated": ...} with one triple per hypothesis, in
request order. GET /health reports the loaded backend. The service
keeps no per-request state; inference runs behind a single lock so
concurrent requests are serialized at the model.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI
from pydantic import BaseModel, Field


class ScoreRequest(BaseModel):
    premise: str
    hypotheses: list[str]


class TripleOut(BaseModel):
    entail: float = Field(ge=0.0, le=1.0)
    contradict: float = Field(ge=0.0, le=1.0)
    neutral: float = Field(ge=0.0, le=1.0)


class ScoreResponse(BaseModel):
    scores: list[TripleOut]
    truncated: bool = False


def create_app(backend) -> FastAPI:
    app = FastAPI(title="nli-scorer", docs_url=None, redoc_url=None)
    inference_lock = threading.Lock()

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        with inference_lock:
            result = backend.score(request.premise, list(request.hypotheses))
        return ScoreResponse(
            scores=[
                TripleOut(entail=t.entail, contradict=t.contradict, neutral=t.neutral)
                for t in result.scores
            ],
            truncated=result.truncated,
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "model": backend.name}

    return app
