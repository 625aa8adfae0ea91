"""Search-provider clients, corpus aggregation, and engine-weight calibration.

General web engines (google, bing, yahoo) are modeled as fixture providers
that replay recorded responses byte-deterministically; StackOverflow also has
a live client against the public question-search API.  Provider failures are
signalled with typed errors and are non-fatal to the pipeline.
"""

from __future__ import annotations

import html
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import httpx

from .extract import RawPage, detect_stack_traces, extract_page_content
from .model import Corpus, ErrorQuery, MalformedUrl, PageContent, ResultEntry, canonicalize_url

__all__ = [
    "CalibrationSample",
    "DEFAULT_ENGINE_WEIGHTS",
    "EmptyCalibration",
    "FixtureSet",
    "GENERAL_ENGINE_IDS",
    "ProviderAuth",
    "ProviderDescriptor",
    "ProviderError",
    "ProviderResult",
    "ProviderTimeout",
    "ProviderUnavailable",
    "QA_ENGINE_IDS",
    "aggregate",
    "calibrate_engine_weights",
    "default_descriptors",
    "fetch_results",
]

# Calibrated defaults: general engines sum to 1.00, the Q&A site is pinned at 1.00.
DEFAULT_ENGINE_WEIGHTS: dict[str, float] = {
    "bing": 0.30,
    "google": 0.41,
    "stackoverflow": 1.00,
    "yahoo": 0.29,
}
GENERAL_ENGINE_IDS = frozenset({"google", "bing", "yahoo"})
QA_ENGINE_IDS = frozenset({"stackoverflow"})

STACKOVERFLOW_API = "https://api.stackexchange.com/2.3/search/advanced"
DEFAULT_SO_KEY_ENV = "STACKEXCHANGE_API_KEY"


class ProviderError(Exception):
    """Base class for provider failures; never fatal to a whole search."""


class ProviderTimeout(ProviderError):
    """The per-provider deadline was exceeded."""


class ProviderAuth(ProviderError):
    """Credentials are missing or were rejected."""


class ProviderUnavailable(ProviderError):
    """Transport failure or unusable provider configuration."""


class EmptyCalibration(ValueError):
    """A general engine has no calibration samples."""


@dataclass(frozen=True, slots=True)
class ProviderResult:
    """One raw result row as returned by a provider."""

    url: str
    title: str
    position: int
    snippet: str | None = None
    so_votes: int | None = None
    traffic_rank: int | None = None

    def __post_init__(self) -> None:
        if self.position < 1:
            raise ValueError(f"position must be >= 1, got {self.position}")
        if self.traffic_rank is not None and self.traffic_rank < 1:
            raise ValueError(f"traffic_rank must be positive, got {self.traffic_rank}")


@dataclass(frozen=True, slots=True)
class ProviderDescriptor:
    """Configuration of one provider: identity, trust weight, and kind."""

    id: str
    weight: float
    kind: str = "fixture"
    api_key_env: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("provider id must be non-empty")
        if not 0.0 < self.weight <= 1.0:
            raise ValueError(f"provider weight must be in (0,1], got {self.weight}")
        if self.kind not in ("live", "fixture"):
            raise ValueError(f"provider kind must be live or fixture, got {self.kind!r}")


@dataclass(frozen=True, slots=True)
class CalibrationSample:
    """Traffic ranks of one provider's top results for one calibration query."""

    provider_id: str
    query_id: str
    result_ranks: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "result_ranks", tuple(self.result_ranks))
        if not self.result_ranks:
            raise ValueError("result_ranks must be non-empty")
        if any(r < 1 for r in self.result_ranks):
            raise ValueError("result_ranks must all be >= 1")


def default_descriptors() -> tuple[ProviderDescriptor, ...]:
    """The shipped provider set: three fixture engines plus fixture StackOverflow."""
    return tuple(
        ProviderDescriptor(id=pid, weight=DEFAULT_ENGINE_WEIGHTS[pid], kind="fixture")
        for pid in ("google", "bing", "yahoo", "stackoverflow")
    )


# ---------------------------------------------------------------------------
# Fixture replay
# ---------------------------------------------------------------------------


class FixtureSet:
    """Recorded provider responses plus inline result-page HTML.

    File format: ``{"queries": {query text: {provider id: [result rows]}},
    "pages": {canonical url: html}}``.  Result rows carry url, title,
    position, and optional snippet / so_votes / traffic_rank (so_votes is
    meaningful only on Q&A provider rows).
    """

    def __init__(self, queries: Mapping[str, Mapping[str, Sequence[Mapping[str, Any]]]],
                 pages: Mapping[str, str]):
        self._queries: dict[str, dict[str, tuple[ProviderResult, ...]]] = {}
        for query_text, by_provider in queries.items():
            parsed: dict[str, tuple[ProviderResult, ...]] = {}
            for provider_id, rows in by_provider.items():
                parsed[provider_id] = tuple(
                    ProviderResult(
                        url=row["url"],
                        title=row.get("title", ""),
                        position=row["position"],
                        snippet=row.get("snippet"),
                        so_votes=row.get("so_votes"),
                        traffic_rank=row.get("traffic_rank"),
                    )
                    for row in rows
                )
            self._queries[query_text] = parsed
        self.pages: dict[str, str] = dict(pages)

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "FixtureSet":
        return cls(queries=data.get("queries", {}), pages=data.get("pages", {}))

    @classmethod
    def load(cls, path: str | Path) -> "FixtureSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonable(json.load(fh))

    def queries(self) -> tuple[str, ...]:
        return tuple(sorted(self._queries))

    def results(self, query: str, provider_id: str, limit: int) -> tuple[ProviderResult, ...]:
        return self._queries.get(query, {}).get(provider_id, ())[:limit]

    def raw_pages(self, fetched_at: float = 0.0) -> dict[str, RawPage]:
        return {
            url: RawPage(url=url, html=page_html, fetched_at=fetched_at)
            for url, page_html in self.pages.items()
        }


# ---------------------------------------------------------------------------
# Fetching
# ---------------------------------------------------------------------------


def _fetch_stackoverflow_live(
    query: str,
    limit: int,
    api_key: str,
    timeout: float,
    transport: httpx.BaseTransport | None,
) -> tuple[ProviderResult, ...]:
    params = {
        "order": "desc",
        "sort": "relevance",
        "q": query,
        "site": "stackoverflow",
        "pagesize": min(100, limit),
        "key": api_key,
    }
    try:
        with httpx.Client(timeout=timeout, transport=transport) as client:
            response = client.get(STACKOVERFLOW_API, params=params)
    except httpx.TimeoutException as exc:
        raise ProviderTimeout(f"stackoverflow timed out after {timeout}s") from exc
    except httpx.HTTPError as exc:
        raise ProviderUnavailable(f"stackoverflow transport failure: {exc}") from exc

    if response.status_code in (401, 403):
        raise ProviderAuth(f"stackoverflow rejected credentials: {response.status_code}")
    if response.status_code != 200:
        raise ProviderUnavailable(f"stackoverflow returned {response.status_code}")

    results = []
    position = 0
    for item in response.json().get("items", []):
        link = item.get("link")
        if not link:
            continue
        position += 1
        results.append(
            ProviderResult(
                url=link,
                title=html.unescape(item.get("title", "")),
                position=position,
                snippet=None,
                so_votes=item.get("score"),
            )
        )
        if position >= limit:
            break
    return tuple(results)


def fetch_results(
    provider: ProviderDescriptor,
    query: str,
    limit: int,
    *,
    fixture_set: FixtureSet | None = None,
    timeout: float = 5.0,
    retries: int = 1,
    transport: httpx.BaseTransport | None = None,
) -> tuple[ProviderResult, ...]:
    """Fetch up to ``limit`` results from one provider, in rank order.

    Fixture providers replay recorded responses; the live StackOverflow
    client queries the public question-search endpoint and fills ``so_votes``
    from the question score.  Transient failures are retried ``retries``
    times before the typed error escapes.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")

    if provider.kind == "fixture":
        if fixture_set is None:
            raise ProviderUnavailable(f"provider {provider.id!r} has no fixture set")
        rows = fixture_set.results(query, provider.id, limit)
    else:
        if provider.id != "stackoverflow":
            raise ProviderUnavailable(f"no live client for provider {provider.id!r}")
        env_name = provider.api_key_env or DEFAULT_SO_KEY_ENV
        api_key = os.environ.get(env_name)
        if not api_key:
            raise ProviderAuth(f"missing credentials: set {env_name}")
        attempt = 0
        while True:
            try:
                rows = _fetch_stackoverflow_live(query, limit, api_key, timeout, transport)
                break
            except (ProviderTimeout, ProviderUnavailable):
                attempt += 1
                if attempt > retries:
                    raise

    if provider.id not in QA_ENGINE_IDS:
        # Vote scores only make sense on Q&A provider rows.
        rows = tuple(
            r if r.so_votes is None else ProviderResult(
                url=r.url, title=r.title, position=r.position,
                snippet=r.snippet, so_votes=None, traffic_rank=r.traffic_rank,
            )
            for r in rows
        )
    return rows


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def _select_best(candidates: Iterable[tuple[float, str, int, Any]]) -> Any:
    """Pick by provider weight (desc), provider id (asc), position (asc)."""
    best = min(candidates, key=lambda c: (-c[0], c[1], c[2]))
    return best[3]


def aggregate(
    query: ErrorQuery,
    results_by_provider: Mapping[str, Sequence[ProviderResult]],
    raw_pages: Mapping[str, RawPage] | None = None,
    weights: Mapping[str, float] | None = None,
    built_at: float | None = None,
) -> Corpus:
    """Merge per-provider results into a deduplicated corpus.

    Results are merged by canonical URL; each provider contributes its best
    (smallest) position per URL.  Title, snippet, votes and traffic rank are
    taken from the highest-weight provider that supplied them (ties broken by
    provider id, then position).  Page content comes from ``raw_pages`` when
    available, otherwise it is built from title + snippet.  The output is
    independent of provider iteration order.
    """
    raw_pages = raw_pages or {}
    weights = weights if weights is not None else DEFAULT_ENGINE_WEIGHTS

    merged: dict[str, dict[str, list[tuple[int, ProviderResult]]]] = {}
    originals: dict[str, set[str]] = {}
    for provider_id, rows in results_by_provider.items():
        for row in rows:
            try:
                canonical = canonicalize_url(row.url)
            except MalformedUrl:
                continue
            merged.setdefault(canonical, {}).setdefault(provider_id, []).append(
                (row.position, row)
            )
            originals.setdefault(canonical, set()).add(row.url)

    entries = []
    for canonical in sorted(merged):
        by_provider = merged[canonical]
        positions = {pid: min(pos for pos, _ in rows) for pid, rows in by_provider.items()}

        candidates = []
        for pid, rows in by_provider.items():
            pos, row = min(rows, key=lambda pr: pr[0])
            candidates.append((weights.get(pid, 0.0), pid, pos, row))
        best_row = _select_best(candidates)
        title = best_row.title

        vote_rows = [c for c in candidates if c[3].so_votes is not None]
        so_votes = _select_best(vote_rows).so_votes if vote_rows else None
        rank_rows = [c for c in candidates if c[3].traffic_rank is not None]
        traffic_rank = _select_best(rank_rows).traffic_rank if rank_rows else None

        if canonical in raw_pages:
            content = extract_page_content(raw_pages[canonical])
        else:
            snippet_rows = [c for c in candidates if c[3].snippet]
            snippet = _select_best(snippet_rows).snippet if snippet_rows else ""
            body_text = "\n".join(part for part in (title, snippet) if part)
            content = PageContent(
                body_text=body_text,
                stack_traces=detect_stack_traces([body_text]) if body_text else (),
            )

        entries.append(
            ResultEntry(
                canonical_url=canonical,
                original_urls=frozenset(originals[canonical]),
                title=title,
                per_provider_positions=positions,
                content=content,
                so_votes=so_votes,
                traffic_rank=traffic_rank,
            )
        )

    return Corpus(
        query=query,
        entries=tuple(entries),
        built_at=time.time() if built_at is None else built_at,
    )


# ---------------------------------------------------------------------------
# Engine-weight calibration
# ---------------------------------------------------------------------------


def calibrate_engine_weights(
    samples: Sequence[CalibrationSample],
    general_engine_ids: frozenset[str] | set[str] = GENERAL_ENGINE_IDS,
    qa_engine_ids: frozenset[str] | set[str] = QA_ENGINE_IDS,
) -> dict[str, float]:
    """Derive per-engine weights from sampled traffic ranks.

    Each general engine's average result rank is inverted and the inverses are
    normalized to sum to 1.0; Q&A engines get a fixed confidence of 1.0.
    Returns full-precision weights (round only for display).

    Raises:
        EmptyCalibration: when a general engine has no samples.
    """
    pooled: dict[str, list[int]] = {}
    for sample in samples:
        if sample.provider_id in general_engine_ids:
            pooled.setdefault(sample.provider_id, []).extend(sample.result_ranks)

    missing = sorted(set(general_engine_ids) - set(pooled))
    if missing:
        raise EmptyCalibration(f"no calibration samples for: {', '.join(missing)}")

    inverses = {pid: len(ranks) / sum(ranks) for pid, ranks in pooled.items()}
    total = sum(inverses.values())
    weights = {pid: inv / total for pid, inv in inverses.items()}
    for pid in qa_engine_ids:
        weights[pid] = 1.0
    return weights
