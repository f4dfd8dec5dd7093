"""HTTP search service: one process serving search, articles, and health.

The index is loaded once at startup and never mutated afterwards, so
request handlers run in parallel without coordination.  External scorer
and embedder backends are optional; when one fails mid-query the pipeline
answers with its deterministic fallback and marks the response degraded
rather than erroring.
"""

from __future__ import annotations

import os
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import ConfigError
from .highlight import EmbeddingProvider, ExternalEmbedder, HashNGramEmbedder
from .index import FilterSet, load_index
from .pipeline import SearchOptions, run_search
from .rerank import ExternalScorer, LexicalScorer, SpanScorer

__all__ = ["ServiceConfig", "load_config", "create_app"]

ENV_PREFIX = "LITDEX_"
SCORER_KINDS = ("lexical", "external")
PROVIDER_KINDS = ("hash_ngram", "external")


@dataclass
class ServiceConfig:
    """Service settings; TOML keys and LITDEX_* env vars mirror the fields."""

    index_path: str = ""
    host: str = "127.0.0.1"
    port: int = 8080
    scorer: str = "lexical"
    scorer_endpoint: str = ""
    provider: str = "hash_ngram"
    provider_endpoint: str = ""
    highlight_k: int = 10
    k_first_stage: int = 96
    max_results: int = 20
    request_timeout_s: float = 10.0
    cors_origins: list[str] = field(default_factory=lambda: ["*"])

    def validate(self) -> None:
        if not self.index_path:
            raise ConfigError("index_path is required")
        if self.scorer not in SCORER_KINDS:
            raise ConfigError(f"scorer must be one of {SCORER_KINDS}, got {self.scorer!r}")
        if self.provider not in PROVIDER_KINDS:
            raise ConfigError(f"provider must be one of {PROVIDER_KINDS}, got {self.provider!r}")
        if self.scorer == "external" and not self.scorer_endpoint:
            raise ConfigError("scorer_endpoint is required when scorer = 'external'")
        if self.provider == "external" and not self.provider_endpoint:
            raise ConfigError("provider_endpoint is required when provider = 'external'")
        if not 1 <= self.max_results <= self.k_first_stage:
            raise ConfigError("expected 1 <= max_results <= k_first_stage")
        if self.highlight_k < 1:
            raise ConfigError("highlight_k must be >= 1")
        if self.request_timeout_s <= 0:
            raise ConfigError("request_timeout_s must be positive")

    def make_scorer(self) -> SpanScorer:
        if self.scorer == "external":
            return ExternalScorer(self.scorer_endpoint, timeout=self.request_timeout_s)
        return LexicalScorer()

    def make_provider(self) -> EmbeddingProvider:
        if self.provider == "external":
            return ExternalEmbedder(self.provider_endpoint, timeout=self.request_timeout_s)
        return HashNGramEmbedder()


def _coerce(name: str, raw: str, target_type: object) -> object:
    if target_type is str:
        return raw
    if target_type is int:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from exc
    if target_type is float:
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected a number, got {raw!r}") from exc
    # remaining field type is list[str]: comma-separated in the environment
    return [part.strip() for part in raw.split(",") if part.strip()]


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Load service config from an optional TOML file plus env overrides.

    Unknown keys (file or LITDEX_* environment) are errors so typos fail
    loudly.  Environment overrides win over file values.
    """
    allowed = {f.name for f in fields(ServiceConfig)}
    type_map = {"index_path": str, "host": str, "port": int, "scorer": str,
                "scorer_endpoint": str, "provider": str, "provider_endpoint": str,
                "highlight_k": int, "k_first_stage": int, "max_results": int,
                "request_timeout_s": float, "cors_origins": list}

    values: dict[str, object] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML ({exc})") from exc
        for key, value in data.items():
            if key not in allowed:
                raise ConfigError(f"unknown config key: {key}")
            expected = type_map[key]
            if expected is list:
                if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                    raise ConfigError(f"{key}: expected a list of strings")
            elif expected is float:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ConfigError(f"{key}: expected a number")
                value = float(value)
            elif not isinstance(value, expected) or isinstance(value, bool):
                raise ConfigError(f"{key}: expected {expected.__name__}")
            values[key] = value

    for env_name, raw in sorted(os.environ.items()):
        if not env_name.startswith(ENV_PREFIX):
            continue
        key = env_name[len(ENV_PREFIX):].lower()
        if key not in allowed:
            raise ConfigError(f"unknown config key: {env_name}")
        values[key] = _coerce(env_name, raw, type_map[key])

    config = ServiceConfig(**values)  # type: ignore[arg-type]
    config.validate()
    return config


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the FastAPI app; the index is loaded when the app starts.

    A failure to load the index aborts startup, so a misconfigured service
    dies immediately instead of serving errors.
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.index = load_index(config.index_path)
        app.state.started_at = time.monotonic()
        yield

    app = FastAPI(title="litdex", lifespan=lifespan)
    app.state.index = None
    app.state.config = config
    app.state.scorer = config.make_scorer()
    app.state.provider = config.make_provider()

    app.add_middleware(
        CORSMiddleware,
        allow_origins=config.cors_origins,
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.get("/api/search")
    def api_search(
        q: str = Query(default=""),
        year_from: int | None = Query(default=None),
        year_to: int | None = Query(default=None),
        journal: list[str] = Query(default=[]),
        source: list[str] = Query(default=[]),
        author: list[str] = Query(default=[]),
        max_results: int | None = Query(default=None),
        rerank: bool = Query(default=True),
        k: int | None = Query(default=None),
    ):
        index = app.state.index
        if index is None:
            return JSONResponse(status_code=503, content={"error": "index not loaded"})
        k_first_stage = k if k is not None else config.k_first_stage
        if max_results is None:
            # a small explicit k lowers the page-size default with it
            effective_max = min(config.max_results, max(k_first_stage, 1))
        else:
            effective_max = max_results
        options = SearchOptions(
            query=q,
            filters=FilterSet(
                year_from=year_from,
                year_to=year_to,
                journals=frozenset(journal),
                sources=frozenset(source),
                authors=frozenset(author),
            ),
            k_first_stage=k_first_stage,
            max_results=effective_max,
            rerank=rerank,
            highlight_k=config.highlight_k,
        )
        try:
            body = run_search(index, options, app.state.scorer, app.state.provider)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return JSONResponse(content=body)

    @app.get("/api/article/{article_id}")
    def api_article(article_id: str):
        index = app.state.index
        if index is None:
            return JSONResponse(status_code=503, content={"error": "index not loaded"})
        article = (index.articles or {}).get(article_id)
        if article is None:
            return JSONResponse(status_code=404, content={"error": f"unknown article {article_id!r}"})
        return JSONResponse(
            content={
                "article_id": article.article_id,
                "title": article.title,
                "abstract": article.abstract,
                "paragraphs": list(article.paragraphs),
                "year": article.year,
                "authors": list(article.authors),
                "journal": article.journal,
                "source": article.source,
            }
        )

    @app.get("/healthz")
    def healthz():
        index = app.state.index
        if index is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return JSONResponse(
            content={
                "status": "ok",
                "n_units": index.n_units,
                "scheme": index.scheme.value if index.scheme else None,
                "scorer": config.scorer,
                "uptime_s": round(time.monotonic() - app.state.started_at, 3),
            }
        )

    return app
