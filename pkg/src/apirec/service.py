"""HTTP facade over a loaded index: query, endpoint lookup, and health.

The index is immutable after load, so every handler is a pure read and the
service is safe under concurrent requests. Rebuilds happen via the CLI, not
over HTTP.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import index_store, rank
from .errors import ApirecError, NoFeatures
from .evaluation import parse_draft

log = logging.getLogger(__name__)

PREVIEW_TEXT_CHARS = 240


class QueryRequest(BaseModel):
    """A draft (YAML/JSON text or an already-parsed tree) plus query options."""

    draft: str | dict[str, Any]
    top_k: int = 10
    config_override: dict[str, Any] | None = None


def _preview(record) -> dict[str, Any]:
    return {
        "name": record.name,
        "methods": sorted(record.operations),
        "quality": record.quality,
        "text": record.raw_text[:PREVIEW_TEXT_CHARS],
        "source_spec_ids": record.source_spec_ids,
    }


def create_app(index: index_store.CorpusIndex | None = None,
               top_k_max: int = 100, ui_dir: str | Path | None = None) -> FastAPI:
    """Assemble the application around one (optional) loaded index."""
    app = FastAPI(title="apirec", version="0.1.0")

    def require_index() -> index_store.CorpusIndex:
        if index is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        return index

    @app.get("/v1/health")
    def health() -> dict[str, Any]:
        idx = require_index()
        return {"status": "ok", "format_version": idx.format_version, **idx.stats()}

    @app.get("/v1/endpoints/{endpoint_id}")
    def endpoint_detail(endpoint_id: int) -> dict[str, Any]:
        idx = require_index()
        if endpoint_id < 0 or endpoint_id >= len(idx.records):
            raise HTTPException(status_code=404, detail=f"no endpoint {endpoint_id}")
        record = idx.records[endpoint_id]
        return {
            "endpoint_id": record.endpoint_id,
            "name": record.name,
            "quality": record.quality,
            "raw_text": record.raw_text,
            "tree_tokens": dict(sorted(record.tree_tokens.items())),
            "keyword_tokens": dict(sorted(record.keyword_tokens.items())),
            "source_spec_ids": record.source_spec_ids,
            "operations": record.operations,
        }

    @app.post("/v1/query")
    def query(request: QueryRequest) -> dict[str, Any]:
        idx = require_index()
        try:
            draft = parse_draft(request.draft)
            config = rank.FusionConfig.from_dict(request.config_override or {})
        except (ApirecError, NoFeatures, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        top_k = max(1, min(request.top_k, top_k_max))
        try:
            results = rank.rank_endpoints(draft, idx, config, top_k=top_k)
        except ApirecError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "query_name": draft.endpoint_name,
            "results": [
                {
                    "endpoint_id": r.endpoint_id,
                    "name": r.name,
                    "normalized_probability": r.normalized_probability,
                    "raw_score": r.raw_score,
                    "feature_breakdown": r.feature_breakdown,
                    "quality": idx.records[r.endpoint_id].quality,
                    "preview": _preview(idx.records[r.endpoint_id]),
                }
                for r in results
            ],
        }

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def create_app_from_path(index_dir: str | Path, top_k_max: int = 100,
                         ui_dir: str | Path | None = None) -> FastAPI:
    """Load the index from disk at startup and build the app."""
    index = index_store.load_index(index_dir)
    log.info("loaded index with %d endpoints from %s", len(index.records), index_dir)
    return create_app(index, top_k_max=top_k_max, ui_dir=ui_dir)
