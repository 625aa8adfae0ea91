"""Orchestrate one search: fetch, aggregate, extract, score, filter, sort.

Provider fan-out is concurrent with a per-provider deadline; individual
provider failures are recorded in the result's provider status map and never
abort the run.  Given identical provider responses and configuration, the
ranked output is byte-identical across runs (timing metadata is excluded from
the canonical serialization).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import httpx

from .model import Corpus, ErrorQuery, MalformedUrl, ResultEntry, ScoreVector, canonicalize_url
from .extract import RawPage
from .providers import (
    FixtureSet,
    ProviderDescriptor,
    ProviderError,
    ProviderResult,
    ProviderTimeout,
    aggregate,
    fetch_results,
)
from .scoring import ScoreConfig, score_corpus

__all__ = [
    "InvalidQuery",
    "NoProvidersAvailable",
    "RankedItem",
    "RankedResults",
    "RuntimeOptions",
    "run_search",
    "run_search_with_corpus",
]


class InvalidQuery(ValueError):
    """The query does not satisfy the model invariants (e.g. empty message)."""


class NoProvidersAvailable(RuntimeError):
    """Every configured provider failed; there is nothing to rank."""


@dataclass(frozen=True, slots=True)
class RuntimeOptions:
    """Execution knobs that are not part of the scoring configuration."""

    fixture_set: FixtureSet | None = None
    result_limit: int = 15
    per_provider_timeout: float = 5.0
    retries: int = 1
    transport: httpx.BaseTransport | None = None
    fetch_live_pages: bool = False
    built_at: float | None = None


@dataclass(frozen=True, slots=True)
class RankedItem:
    """One ranked result with its full score breakdown."""

    rank: int
    entry: ResultEntry
    scores: ScoreVector

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "entry": self.entry.to_jsonable(),
            "rank": self.rank,
            "scores": self.scores.to_jsonable(),
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "RankedItem":
        return cls(
            rank=data["rank"],
            entry=ResultEntry.from_jsonable(data["entry"]),
            scores=ScoreVector.from_jsonable(data["scores"]),
        )


def _sort_key(entry: ResultEntry, scores: ScoreVector) -> tuple:
    return (-scores.s_final, -scores.s_ser, -scores.s_cnt, entry.canonical_url)


@dataclass(frozen=True, slots=True)
class RankedResults:
    """The ordered outcome of one search run.

    ``elapsed`` (seconds) is timing metadata: excluded from equality and from
    the canonical JSON form, which must be deterministic.
    """

    query: ErrorQuery
    config_echo: ScoreConfig
    items: tuple[RankedItem, ...]
    provider_status: Mapping[str, str]
    elapsed: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "provider_status", dict(self.provider_status))
        for i, item in enumerate(self.items):
            if item.rank != i + 1:
                raise ValueError(f"ranks must be contiguous from 1, got {item.rank} at {i}")
        keys = [_sort_key(item.entry, item.scores) for item in self.items]
        if any(a > b for a, b in zip(keys, keys[1:])):
            raise ValueError("items are not sorted by the documented order")

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "config_echo": self.config_echo.to_jsonable(),
            "items": [item.to_jsonable() for item in self.items],
            "provider_status": dict(sorted(self.provider_status.items())),
            "query": self.query.to_jsonable(),
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "RankedResults":
        return cls(
            query=ErrorQuery.from_jsonable(data["query"]),
            config_echo=ScoreConfig.from_jsonable(data["config_echo"]),
            items=tuple(RankedItem.from_jsonable(i) for i in data["items"]),
            provider_status=dict(data["provider_status"]),
        )

    def top(self, n: int) -> "RankedResults":
        """The first ``n`` items as a valid RankedResults value."""
        return replace(self, items=self.items[: max(0, n)])


# ---------------------------------------------------------------------------
# Run
# ---------------------------------------------------------------------------


def _fan_out(
    query_text: str,
    providers: Sequence[ProviderDescriptor],
    options: RuntimeOptions,
) -> tuple[dict[str, tuple[ProviderResult, ...]], dict[str, str]]:
    results: dict[str, tuple[ProviderResult, ...]] = {}
    status: dict[str, str] = {}
    deadline = time.monotonic() + options.per_provider_timeout * (options.retries + 1)
    with ThreadPoolExecutor(max_workers=len(providers)) as pool:
        futures = {
            descriptor.id: pool.submit(
                fetch_results,
                descriptor,
                query_text,
                options.result_limit,
                fixture_set=options.fixture_set,
                timeout=options.per_provider_timeout,
                retries=options.retries,
                transport=options.transport,
            )
            for descriptor in providers
        }
        for provider_id, future in futures.items():
            budget = max(0.05, deadline - time.monotonic())
            try:
                results[provider_id] = future.result(timeout=budget)
                status[provider_id] = "ok"
            except ProviderTimeout:
                status[provider_id] = "timeout"
            except FutureTimeout:
                future.cancel()
                status[provider_id] = "timeout"
            except ProviderError:
                status[provider_id] = "error"
    return results, status


def _to_fetchable(canonical_url: str) -> str:
    return "https://" + canonical_url


def _fetch_live_pages(
    urls: Sequence[str], options: RuntimeOptions
) -> dict[str, RawPage]:
    pages: dict[str, RawPage] = {}
    with httpx.Client(
        timeout=options.per_provider_timeout,
        transport=options.transport,
        follow_redirects=True,
    ) as client:
        for url in urls:
            try:
                response = client.get(_to_fetchable(url))
            except httpx.HTTPError:
                continue
            if response.status_code == 200 and response.text:
                pages[url] = RawPage(url=url, html=response.text, fetched_at=time.time())
    return pages


def run_search_with_corpus(
    query: ErrorQuery,
    config: ScoreConfig,
    providers: Sequence[ProviderDescriptor],
    options: RuntimeOptions | None = None,
) -> tuple["RankedResults", Corpus]:
    """Like :func:`run_search` but also returns the aggregated corpus."""
    options = options or RuntimeOptions()
    if not query.message.strip():
        raise InvalidQuery("query message must be non-empty")
    if not providers:
        raise ValueError("at least one provider is required")
    ids = [d.id for d in providers]
    if len(set(ids)) != len(ids):
        raise ValueError("provider ids must be distinct")

    started = time.monotonic()
    results_by_provider, status = _fan_out(query.message, providers, options)
    if not results_by_provider:
        raise NoProvidersAvailable(f"all providers failed: {status}")

    provider_weights = {d.id: d.weight for d in providers}
    effective = config
    if config.engine_weights is None:
        effective = replace(config, engine_weights=provider_weights)

    raw_pages: dict[str, RawPage] = {}
    if options.fixture_set is not None:
        raw_pages.update(options.fixture_set.raw_pages())
    if options.fetch_live_pages:
        returned = sorted(
            {
                url
                for rows in results_by_provider.values()
                for url in _canonical_urls(rows)
                if url not in raw_pages
            }
        )
        raw_pages.update(_fetch_live_pages(returned, options))

    corpus = aggregate(
        query,
        results_by_provider,
        raw_pages=raw_pages,
        weights=effective.engine_weights,
        built_at=options.built_at,
    )

    vectors = score_corpus(query, corpus, effective)
    survivors = [
        (entry, vectors[entry.canonical_url])
        for entry in corpus.entries
        if vectors[entry.canonical_url].s_final >= effective.min_final_score
    ]
    survivors.sort(key=lambda pair: _sort_key(*pair))
    items = tuple(
        RankedItem(rank=i + 1, entry=entry, scores=scores)
        for i, (entry, scores) in enumerate(survivors)
    )
    ranked = RankedResults(
        query=query,
        config_echo=effective,
        items=items,
        provider_status=status,
        elapsed=time.monotonic() - started,
    )
    return ranked, corpus


def _canonical_urls(rows: Sequence[ProviderResult]) -> list[str]:
    urls = []
    for row in rows:
        try:
            urls.append(canonicalize_url(row.url))
        except MalformedUrl:
            continue
    return urls


def run_search(
    query: ErrorQuery,
    config: ScoreConfig,
    providers: Sequence[ProviderDescriptor],
    options: RuntimeOptions | None = None,
) -> RankedResults:
    """Run one end-to-end search and return the ranked, score-annotated results.

    Raises:
        InvalidQuery: empty query message.
        NoProvidersAvailable: every provider failed or timed out.
    """
    ranked, _ = run_search_with_corpus(query, config, providers, options)
    return ranked
