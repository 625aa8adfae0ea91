"""HTTP front door: search, health, config and stored-run endpoints.

All payloads are canonical JSON.  Given fixture providers and identical
request bodies, the search response body is byte-deterministic; wall-clock
timing travels in the ``X-Elapsed-Ms`` header instead of the body.
"""

from __future__ import annotations

import os
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .config import AppConfig
from .extract import NotAStackTrace, parse_stack_trace
from .model import MAX_CONTEXT_LINES, ErrorQuery, canonical_json
from .pipeline import (
    InvalidQuery,
    NoProvidersAvailable,
    RuntimeOptions,
    run_search_with_corpus,
)
from .providers import DEFAULT_SO_KEY_ENV, FixtureSet
from .scoring import ScoreConfig
from .store import NotFound, RunRecord, compute_run_id, load_run, save_run

__all__ = ["create_app"]


def _json_response(payload: Any, status_code: int = 200,
                   headers: dict[str, str] | None = None) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
        headers=headers,
    )


def _error(status_code: int, error: str, detail: str) -> Response:
    return _json_response({"detail": detail, "error": error}, status_code)


def _build_query(body: dict[str, Any]) -> tuple[ErrorQuery, list[str]]:
    warnings: list[str] = []
    message = body.get("error_message")
    if not isinstance(message, str) or not message.strip():
        raise InvalidQuery("error_message must be a non-empty string")

    raw_trace = body.get("stack_trace")
    parsed = None
    if raw_trace:
        try:
            parsed = parse_stack_trace(raw_trace)
        except NotAStackTrace:
            warnings.append("stack_trace did not parse; searching without trace context")

    context = body.get("code_context")
    if context:
        lines = context.splitlines()
        if len(lines) > MAX_CONTEXT_LINES:
            warnings.append(f"code_context truncated to {MAX_CONTEXT_LINES} lines")
            context = "\n".join(lines[:MAX_CONTEXT_LINES])
    else:
        context = None

    query = ErrorQuery(
        message=message,
        raw_stack_trace=raw_trace or None,
        parsed_trace=parsed,
        code_context=context,
    )
    return query, warnings


def _merge_score_config(base: ScoreConfig, override: dict[str, Any] | None) -> ScoreConfig:
    if not override:
        return base
    merged = base.to_jsonable()
    merged.update(override)
    return ScoreConfig.from_jsonable(merged)


def create_app(config: AppConfig) -> FastAPI:
    """Build the service around one immutable configuration."""
    app = FastAPI(title="errsearch", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    fixture_set: FixtureSet | None = None
    if config.fixture_path:
        fixture_set = FixtureSet.load(config.fixture_path)
    any_live = any(p.kind == "live" for p in config.providers)
    options = RuntimeOptions(
        fixture_set=fixture_set,
        result_limit=config.result_limit,
        per_provider_timeout=config.per_provider_timeout,
        retries=config.retries,
        fetch_live_pages=any_live,
    )

    @app.post("/api/v1/search")
    async def search(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "InvalidQuery", "request body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "InvalidQuery", "request body must be a JSON object")

        try:
            query, warnings = _build_query(body)
            score_config = _merge_score_config(config.score, body.get("score_config"))
        except (InvalidQuery, ValueError, TypeError) as exc:
            return _error(400, "InvalidQuery", str(exc))

        try:
            ranked, corpus = run_search_with_corpus(
                query, score_config, config.providers, options
            )
        except NoProvidersAvailable as exc:
            return _error(503, "NoProvidersAvailable", str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            return _error(500, "Internal", str(exc))

        run_id = compute_run_id(query, ranked.config_echo, corpus)
        if config.store_root:
            save_run(RunRecord(run_id=run_id, results=ranked), config.store_root)

        payload = ranked.to_jsonable()
        payload["run_id"] = run_id
        payload["warnings"] = warnings
        headers = {"X-Elapsed-Ms": f"{ranked.elapsed * 1000:.0f}"}
        return _json_response(payload, headers=headers)

    @app.get("/api/v1/health")
    async def health() -> Response:
        statuses = {}
        for provider in config.providers:
            if provider.kind == "fixture":
                ok = fixture_set is not None
                detail = "fixtures loaded" if ok else "no fixture set configured"
            else:
                env_name = provider.api_key_env or DEFAULT_SO_KEY_ENV
                ok = bool(os.environ.get(env_name))
                detail = "credentials present" if ok else f"missing {env_name}"
            statuses[provider.id] = {
                "detail": detail,
                "kind": provider.kind,
                "status": "ok" if ok else "unconfigured",
            }
        overall = "ok" if any(s["status"] == "ok" for s in statuses.values()) else "degraded"
        return _json_response({"providers": statuses, "status": overall})

    @app.get("/api/v1/config")
    async def get_config() -> Response:
        # Secrets never enter AppConfig: live providers only name the env var.
        return _json_response(config.to_jsonable())

    @app.get("/api/v1/runs/{run_id}")
    async def get_run(run_id: str) -> Response:
        if not config.store_root:
            return _error(404, "NotFound", "no store configured")
        try:
            record = load_run(run_id, config.store_root)
        except NotFound:
            return _error(404, "NotFound", f"no run {run_id!r}")
        except Exception as exc:
            return _error(500, "Internal", str(exc))
        return _json_response(record.to_jsonable())

    return app
