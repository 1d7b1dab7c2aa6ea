"""JSON-over-HTTP inference service (protocol version /v1).

Endpoints: POST /v1/embed, /v1/score, /v1/generate and GET /v1/health.
Inference runs in eval mode with zero dropout, so identical requests get
identical responses. Model inference is serialized per model instance.
"""

from __future__ import annotations

import threading
from pathlib import Path

import torch
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .models import build_embedder, load_checkpoint
from .vocab import PAD, pad_batch

EMBED_MODEL_NAME = "mini-embed-v1"


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    model: str
    pooling: str
    dim: int
    vectors: list[list[float]]


class ScoreRequest(BaseModel):
    texts: list[str]


class ScoreResponse(BaseModel):
    model: str
    scores: list[float]


class GenerateRequest(BaseModel):
    input: str
    max_input_tokens: int = Field(default=1024, ge=1)
    max_new_tokens: int = Field(default=256, ge=1)


class GenerateResponse(BaseModel):
    model: str
    output: str
    output_tokens: int


def _error(status: int, name: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": name})


def create_app(
    embed_enabled: bool = True,
    embed_seed: int = 12345,
    embed_dim: int = 64,
    max_text_length: int = 2000,
    classifier_ckpt: str | Path | None = None,
    generator_ckpt: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="modelsvc", version="1.0")
    lock = threading.Lock()

    embedder = embed_vocab = None
    if embed_enabled:
        # Byte budget: UTF-8 can expand each char to up to 4 bytes.
        embedder, embed_vocab = build_embedder(seed=embed_seed, dim=embed_dim,
                                               max_len=4 * max_text_length + 8)

    classifier = classifier_vocab = classifier_config = None
    if classifier_ckpt:
        kind, classifier, classifier_vocab, classifier_config = load_checkpoint(classifier_ckpt)
        if kind != "classifier":
            raise ValueError(f"{classifier_ckpt} is a {kind} checkpoint, not a classifier")

    generator = generator_vocab = generator_config = None
    if generator_ckpt:
        kind, generator, generator_vocab, generator_config = load_checkpoint(generator_ckpt)
        if kind != "generator":
            raise ValueError(f"{generator_ckpt} is a {kind} checkpoint, not a generator")

    @app.get("/v1/health")
    def health():
        models = []
        if embedder is not None:
            models.append({"name": EMBED_MODEL_NAME, "kind": "embed", "dim": embed_dim})
        if classifier is not None:
            models.append({"name": "mini-classifier", "kind": "score"})
        if generator is not None:
            models.append({"name": "mini-generator", "kind": "generate"})
        return {"status": "ok" if models else "degraded", "models": models}

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest):
        if not req.texts or any(not t for t in req.texts):
            return _error(400, "EmptyTexts")
        if embedder is None:
            return _error(503, "NoModel")
        if any(len(t) > max_text_length for t in req.texts):
            return _error(413, "TextTooLong")
        encoded = [embed_vocab.encode(t) for t in req.texts]
        with lock, torch.no_grad():
            ids, pad = pad_batch(encoded)
            pooled = embedder.pooled(ids, pad)
        return EmbedResponse(
            model=EMBED_MODEL_NAME, pooling="mean", dim=embed_dim,
            vectors=[[float(x) for x in row] for row in pooled],
        )

    @app.post("/v1/score", response_model=ScoreResponse)
    def score(req: ScoreRequest):
        if classifier is None:
            return _error(503, "NoCheckpoint")
        if not req.texts or any(not t for t in req.texts):
            return _error(400, "EmptyTexts")
        if any(len(t) > max_text_length for t in req.texts):
            return _error(413, "TextTooLong")
        max_len = classifier_config["max_len"]
        encoded = [classifier_vocab.encode(t, max_len=max_len) or [PAD] for t in req.texts]
        with lock, torch.no_grad():
            ids, pad = pad_batch(encoded)
            probs = torch.sigmoid(classifier.logits(ids, pad))
        return ScoreResponse(model="mini-classifier", scores=[float(p) for p in probs])

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        if generator is None:
            return _error(503, "NoCheckpoint")
        if not req.input:
            return _error(400, "EmptyInput")
        # Server-side truncation is authoritative; oversized inputs are
        # accepted and cut to the model's source window.
        max_src = min(req.max_input_tokens, generator_config["max_src_len"])
        src_ids = generator_vocab.encode(req.input, max_len=max_src)
        max_new = min(req.max_new_tokens, generator_config["max_tgt_len"] - 2)
        with lock:
            out_ids = generator.greedy_decode(src_ids, max_new_tokens=max_new)
        return GenerateResponse(
            model="mini-generator",
            output=generator_vocab.decode(out_ids),
            output_tokens=len(out_ids),
        )

    return app
