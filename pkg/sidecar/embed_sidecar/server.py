"""FastAPI app factory and entry point for the embedding sidecar."""

from __future__ import annotations

import os
from contextlib import asynccontextmanager
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_PORT = 8901
DEFAULT_MAX_BATCH = 64


@dataclass(frozen=True)
class SidecarConfig:
    model_name: str = DEFAULT_MODEL
    port: int = DEFAULT_PORT
    max_batch: int = DEFAULT_MAX_BATCH
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if not 0 < self.port < 65536:
            raise ValueError(f"port out of range: {self.port}")

    @classmethod
    def from_env(cls) -> "SidecarConfig":
        return cls(
            model_name=os.environ.get("EMBED_MODEL", DEFAULT_MODEL),
            port=int(os.environ.get("EMBED_PORT", str(DEFAULT_PORT))),
        )


class EmbedRequest(BaseModel):
    texts: list[str]


def _load_default(model_name: str):
    from sentence_transformers import SentenceTransformer

    return SentenceTransformer(model_name)


def _dimension_of(encoder) -> int:
    getter = getattr(encoder, "get_sentence_embedding_dimension", None)
    if getter is not None:
        dim = getter()
        if dim:
            return int(dim)
    probe = np.asarray(encoder.encode(["dimension probe"]))
    return int(probe.shape[-1])


def create_app(config: SidecarConfig | None = None, encoder=None, loader=None) -> FastAPI:
    """Build the service.

    ``encoder`` may be injected (any object with a batch ``encode`` method
    returning an array); otherwise the configured sentence-transformers model
    is loaded on startup. ``loader`` overrides how that load happens.
    """
    config = config or SidecarConfig.from_env()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if app.state.encoder is None:
            app.state.encoder = (loader or _load_default)(config.model_name)
            app.state.dimension = _dimension_of(app.state.encoder)
        yield

    app = FastAPI(title="embed-sidecar", lifespan=lifespan)
    app.state.config = config
    app.state.encoder = encoder
    app.state.dimension = _dimension_of(encoder) if encoder is not None else None

    @app.get("/health")
    def health():
        if app.state.encoder is None:
            raise HTTPException(status_code=503, detail="model loading")
        return {"status": "ok", "dimension": app.state.dimension}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if app.state.encoder is None:
            raise HTTPException(status_code=503, detail="model loading")
        if not request.texts:
            raise HTTPException(status_code=400, detail="empty batch")
        if len(request.texts) > config.max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"batch size {len(request.texts)} exceeds cap {config.max_batch}",
            )
        vectors = np.asarray(app.state.encoder.encode(list(request.texts)), dtype=np.float64)
        if vectors.ndim == 1:
            vectors = vectors[None, :]
        if config.normalize:
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            vectors = vectors / norms
        return {
            "vectors": vectors.tolist(),
            "dimension": app.state.dimension,
            "model": config.model_name,
        }

    return app


def main() -> None:
    import uvicorn

    config = SidecarConfig.from_env()
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)


if __name__ == "__main__":
    main()
