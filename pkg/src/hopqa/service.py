"""JSON-over-HTTP inference service.

Artifacts load once at startup and are never mutated, so identical requests
return identical bodies regardless of interleaving. Errors use one envelope,
``{"error": {"code": ..., "message": ..., ...}}``, with machine-readable
codes the UI keys its notices on.
"""

from __future__ import annotations

import logging

from fastapi import Body, FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .checkpoint import relation_fingerprint
from .errors import AmbiguousEntityError, NoEntityFoundError
from .gazetteer import normalize_surface
from .qa import QAPipeline, answer_question

logger = logging.getLogger(__name__)

TOP_K_MAX = 100


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    payload = {"code": code, "message": message}
    payload.update(extra)
    return JSONResponse(status_code=status, content={"error": payload})


def _autocomplete_rows(pipeline: QAPipeline) -> list[tuple[str, int]]:
    return sorted(set(pipeline.gazetteer.surfaces()))


def create_app(pipeline: QAPipeline) -> FastAPI:
    app = FastAPI(title="hopqa", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    kg = pipeline.kg
    surfaces = _autocomplete_rows(pipeline)

    @app.exception_handler(RequestValidationError)
    def on_bad_request(request, exc):
        return _error(400, "bad_request", "malformed request")

    @app.exception_handler(Exception)
    def on_internal_error(request, exc):
        logger.exception("request failed")
        return _error(500, "internal", "internal server error")

    @app.get("/health")
    def health():
        return {"status": "ok", "fingerprint": pipeline.fingerprint}

    @app.get("/model/info")
    def model_info():
        model = pipeline.model
        return {
            "d": model.d,
            "num_entities": model.num_entities,
            "num_relations": model.num_relations,
            "hashes": {
                "entities": pipeline.fingerprint,
                "relations": relation_fingerprint(kg).hex(),
            },
        }

    @app.get("/entities")
    def entities(prefix: str = "", limit: int = 20):
        limit = max(limit, 0)
        needle = " ".join(normalize_surface(prefix))
        seen = set()
        hits = []
        for surface, idx in surfaces:
            if idx not in seen and surface.startswith(needle):
                seen.add(idx)
                hits.append(idx)
        hits.sort(key=lambda i: (kg.name_of(i), i))
        return [
            {"id": kg.entities[i], "name": kg.name_of(i), "kind": kg.kind_of(i)}
            for i in hits[:limit]
        ]

    @app.post("/ask")
    def ask(payload: dict = Body(...)):
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "empty_question", "question must be a non-empty string")
        top_k = payload.get("top_k", 10)
        if isinstance(top_k, bool) or not isinstance(top_k, int):
            return _error(400, "bad_request", "top_k must be an integer")
        top_k = max(1, min(top_k, TOP_K_MAX))
        try:
            result = answer_question(pipeline, question, top_k=top_k)
        except NoEntityFoundError:
            return _error(
                422,
                "no_entity",
                "no known entity mentioned in the question",
                normalized_question=" ".join(normalize_surface(question)),
            )
        except AmbiguousEntityError as exc:
            return _error(
                422,
                "ambiguity",
                str(exc),
                candidates=[
                    {"id": kg.entities[i], "name": kg.name_of(i)} for i in exc.candidates
                ],
            )
        return {
            "head": {
                "id": result.head_id,
                "name": result.head_name,
                "span": list(result.span),
            },
            "hops": {
                "class": result.hops,
                "probabilities": list(result.hop_probs),
            },
            "answers": [
                {"id": a.entity_id, "name": a.name, "kind": a.kind, "score": a.score}
                for a in result.answers
            ],
        }

    return app
