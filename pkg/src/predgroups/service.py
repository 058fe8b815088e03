"""HTTP surface: POST /recommend, GET /health, GET /model.

Handlers share one immutable recommender; the service never mutates model
state. An empty recommendation is a normal 200 response with ``empty: true``,
never a 404.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .recommend import Recommender, RecommendationQuery


@dataclass
class ServiceState:
    recommender: Recommender | None = None
    fingerprint: str | None = None
    algorithm: str | None = None
    k: int | None = None


class RecommendBody(BaseModel):
    title: str | None = None
    doi: str | None = None
    abstract: str | None = None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="predgroups", version="0.1.0")

    @app.get("/health")
    def health():
        return {"status": "ok", "model_loaded": state.recommender is not None}

    @app.get("/model")
    def model_info():
        if state.recommender is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return {
            "fingerprint": state.fingerprint,
            "algorithm": state.algorithm,
            "k": state.k,
        }

    @app.post("/recommend")
    def recommend(body: RecommendBody):
        if state.recommender is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        if not (body.title or body.doi):
            raise HTTPException(
                status_code=400, detail="request needs a title and/or a doi"
            )
        recommendation = state.recommender.recommend(
            RecommendationQuery(
                title=body.title, doi=body.doi, abstract=body.abstract
            )
        )
        return recommendation.as_dict()

    return app
