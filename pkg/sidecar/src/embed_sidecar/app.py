"""FastAPI application exposing the embedding endpoints.

POST /embed takes {"texts": [...]} (1-64 strings, each at most 16384
UTF-8 bytes) and returns {"model", "dim", "vectors"} with vectors aligned
to request order. GET /health reports 200 once the model is loaded, 503
before. Schema violations map to 400; oversize texts to 413.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

MAX_TEXTS_PER_REQUEST = 64
MAX_TEXT_BYTES = 16384


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1, max_length=MAX_TEXTS_PER_REQUEST)


class EmbedResponse(BaseModel):
    model: str
    dim: int
    vectors: list[list[float]]


def create_app(encoder=None) -> FastAPI:
    """Build the service around an already-constructed encoder.

    With encoder=None the app starts cold and answers 503 everywhere,
    which is the pre-load state the health endpoint reports on.
    """
    app = FastAPI(title="embed-sidecar")
    app.state.encoder = encoder

    @app.exception_handler(RequestValidationError)
    async def _schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "schema violation", "detail": exc.errors()})

    @app.get("/health")
    async def health():
        enc = app.state.encoder
        if enc is None:
            return JSONResponse(status_code=503, content={"status": "loading", "model": None, "dim": None})
        return {"status": "ok", "model": enc.model_id, "dim": enc.dimension}

    @app.post("/embed", response_model=EmbedResponse)
    async def embed(request: EmbedRequest):
        enc = app.state.encoder
        if enc is None:
            return JSONResponse(status_code=503, content={"error": "model not loaded"})
        for text in request.texts:
            if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
                return JSONResponse(
                    status_code=413,
                    content={"error": f"text exceeds {MAX_TEXT_BYTES} bytes"},
                )
        vectors = enc.encode(request.texts)
        if any(not math.isfinite(value) for row in vectors for value in row):
            return JSONResponse(status_code=500, content={"error": "non-finite embedding"})
        return {"model": enc.model_id, "dim": enc.dimension, "vectors": vectors}

    return app
