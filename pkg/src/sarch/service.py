"""HTTP search service.

Endpoints:

    GET /healthz   liveness probe
    GET /stats     corpus manifest and unit counts (503 until an index loads)
    GET /search    q, modality (text|image|table), pipeline
                   (keyword|embedding|hybrid), k

Query parameters are parsed by hand so malformed input yields a 400 with a
readable message instead of a framework-shaped validation blob. Provider
outages surface as 502.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import ServiceConfig, build_provider
from .errors import ProviderError, RetrievalError
from .indexing import tokenize
from .model import Modality
from .persistence import load_index
from .retrieval import PipelineKind, Query, SearchEngine, extract_keywords, load_stopwords

SNIPPET_WIDTH = 220


def build_snippet(text: str, terms: list[str], width: int = SNIPPET_WIDTH) -> str:
    """A window of the display text centred on the earliest query term hit."""
    if not text:
        return ""
    lowered = text.lower()
    pos = min((i for i in (lowered.find(t) for t in terms) if i != -1), default=0)
    start = max(0, pos - width // 4)
    end = start + width
    snippet = text[start:end].strip()
    if start > 0:
        snippet = "..." + snippet
    if end < len(text):
        snippet = snippet + "..."
    return snippet


def _result_payload(engine: SearchEngine, query: Query, entry) -> dict:
    record = dict(engine.display.get(entry.unit_id, {}))
    unit = engine.index.units.get(entry.unit_id)
    payload = {
        "rank": entry.rank,
        "score": entry.score,
        "unit_id": entry.unit_id,
        "doc_id": record.get("doc_id", unit.doc_id if unit else None),
        "title": record.get("title"),
        "page_no": record.get("page_no", unit.page_no if unit else None),
        "modality": record.get("modality", query.modality.value),
    }
    terms = extract_keywords(query.text, engine.stopwords) or tokenize(query.text)
    payload["snippet"] = build_snippet(record.get("text", ""), terms)
    for key in ("block_id", "caption", "image_kind", "ordinal", "header", "rows", "num_rows"):
        if key in record:
            payload[key] = record[key]
    return payload


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=400)


def create_app(engine: SearchEngine | None, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="archive search service", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.config = config

    origins = [o.strip() for o in config.cors_origins.split(",") if o.strip()] or ["*"]
    app.add_middleware(
        CORSMiddleware,
        allow_origins=origins,
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "index_loaded": app.state.engine is not None}

    @app.get("/stats")
    def stats():
        if app.state.engine is None:
            return JSONResponse({"error": "index not loaded"}, status_code=503)
        return app.state.engine.manifest

    @app.get("/search")
    def search(request: Request):
        params = request.query_params
        q = params.get("q", "")
        if not q.strip():
            return _bad_request("query parameter 'q' must be non-empty")
        modality_raw = params.get("modality", Modality.TEXT.value)
        try:
            modality = Modality(modality_raw)
        except ValueError:
            return _bad_request(
                f"unknown modality '{modality_raw}' (expected text, image or table)"
            )
        pipeline_raw = params.get("pipeline", PipelineKind.HYBRID.value)
        try:
            pipeline = PipelineKind(pipeline_raw)
        except ValueError:
            return _bad_request(
                f"unknown pipeline '{pipeline_raw}' (expected keyword, embedding or hybrid)"
            )
        k_raw = params.get("k", str(config.default_k))
        try:
            k = int(k_raw)
        except ValueError:
            return _bad_request(f"'k' must be an integer, got '{k_raw}'")
        if k < 1:
            return _bad_request("'k' must be at least 1")

        if app.state.engine is None:
            return JSONResponse({"error": "index not loaded"}, status_code=503)
        engine: SearchEngine = app.state.engine
        query = Query(text=q, modality=modality, pipeline=pipeline, k=k)
        warning = None
        try:
            ranked = engine.search(query)
        except ProviderError as exc:
            return JSONResponse(
                {
                    "error": str(exc),
                    "endpoint": exc.endpoint,
                    "status": exc.status,
                    "retriable": exc.retriable,
                },
                status_code=502,
            )
        except RetrievalError as exc:
            # a modality the index has no vectors for: empty result, not an error
            ranked, warning = None, str(exc)
        except ValueError as exc:
            return _bad_request(str(exc))

        results = [] if ranked is None else [_result_payload(engine, query, e) for e in ranked]
        body = {
            "query": {
                "q": q,
                "modality": modality.value,
                "pipeline": pipeline.value,
                "k": k,
            },
            "total": len(results),
            "results": results,
        }
        if warning:
            body["warning"] = warning
        return body

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def load_engine(config: ServiceConfig) -> SearchEngine | None:
    """Engine from the configured index file, or None when it does not exist yet."""
    path = Path(config.index_path)
    if not path.is_file():
        return None
    persisted = load_index(path)
    stopwords = load_stopwords(config.stopwords_path or None)
    return SearchEngine.from_persisted(persisted, build_provider(config), stopwords)


def create_app_from_config(config: ServiceConfig) -> FastAPI:
    return create_app(load_engine(config), config)


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app_from_config(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


__all__ = [
    "build_snippet",
    "create_app",
    "create_app_from_config",
    "load_engine",
    "serve",
]
