"""Core domain types shared across the search pipeline, plus URL canonicalization.

All types are immutable value objects validated at construction time, so they
can be shared freely between concurrent tasks.  Every type serializes to a
canonical JSON form (stable field names, lexicographic key order) via
``to_jsonable`` / ``from_jsonable`` and the module-level :func:`canonical_json`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Mapping
from urllib.parse import urlsplit

__all__ = [
    "Corpus",
    "ErrorQuery",
    "Frame",
    "MalformedUrl",
    "PageContent",
    "ResultEntry",
    "ScoreVector",
    "StackTrace",
    "TraceSegment",
    "canonical_json",
    "canonicalize_url",
]


class MalformedUrl(ValueError):
    """Raised when a string cannot be interpreted as a URL."""


# ---------------------------------------------------------------------------
# URL canonicalization
# ---------------------------------------------------------------------------

_TRACKING_KEYS = {"gclid", "fbclid"}
_HOST_RE = re.compile(r"^[a-z0-9]([a-z0-9.\-]*[a-z0-9])?$")
# Scheme-looking prefix in a "//"-less string: allowed only for host:port forms.
_SCHEME_PREFIX_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:(?!\d+(/|$))")


def _clean_query(query: str) -> str:
    """Drop tracking parameters and sort the remaining raw k=v chunks."""
    kept = []
    for chunk in query.split("&"):
        if not chunk:
            continue
        key = chunk.split("=", 1)[0].lower()
        if key.startswith("utm_") or key in _TRACKING_KEYS:
            continue
        kept.append(chunk)
    return "&".join(sorted(kept))


def canonicalize_url(url: str) -> str:
    """Reduce a URL to its canonical scheme-less host+path form.

    Lowercases the host, collapses http/https, strips fragments, tracking
    parameters (utm_*, gclid, fbclid) and trailing slashes, and sorts the
    surviving query parameters.  The result is idempotent: canonical forms
    canonicalize to themselves.

    Raises:
        MalformedUrl: if the input cannot be parsed as an http(s) URL.
    """
    text = url.strip()
    if not text or any(c.isspace() for c in text):
        raise MalformedUrl(f"not a URL: {url!r}")

    if "://" in text:
        scheme = text.split("://", 1)[0].lower()
        if scheme not in ("http", "https"):
            raise MalformedUrl(f"unsupported scheme {scheme!r} in {url!r}")
        to_parse = text
    elif text.startswith("//"):
        to_parse = text
    else:
        if _SCHEME_PREFIX_RE.match(text):
            raise MalformedUrl(f"unsupported scheme in {url!r}")
        to_parse = "//" + text

    try:
        parts = urlsplit(to_parse)
        host = parts.hostname
        port = parts.port
    except ValueError as exc:
        raise MalformedUrl(f"not a URL: {url!r}") from exc

    if not host:
        raise MalformedUrl(f"no host in {url!r}")
    host = host.lower()
    if not _HOST_RE.match(host):
        raise MalformedUrl(f"invalid host {host!r} in {url!r}")
    if port is not None and port not in (80, 443):
        host = f"{host}:{port}"

    path = parts.path
    if path.endswith("/"):
        path = path.rstrip("/")
    query = _clean_query(parts.query)

    return host + path + ("?" + query if query else "")


# ---------------------------------------------------------------------------
# Stack traces
# ---------------------------------------------------------------------------

_IDENT = r"[A-Za-z_$][A-Za-z0-9_$]*"
_QUALIFIED_RE = re.compile(rf"^{_IDENT}(\.{_IDENT})+$")


@dataclass(frozen=True, slots=True)
class Frame:
    """One call frame of a stack trace."""

    class_name: str
    method_name: str
    file: str | None = None
    line: int | None = None

    def __post_init__(self) -> None:
        if not self.class_name:
            raise ValueError("frame class_name must be non-empty")
        if not self.method_name:
            raise ValueError("frame method_name must be non-empty")
        if self.line is not None and self.line < 1:
            raise ValueError(f"frame line must be positive, got {self.line}")
        if self.line is not None and self.file is None:
            raise ValueError("frame line requires a file")

    def render(self, include_line_numbers: bool = True) -> str:
        if self.file is None:
            location = "Unknown Source"
        elif self.line is not None and include_line_numbers:
            location = f"{self.file}:{self.line}"
        else:
            location = self.file
        return f"\tat {self.class_name}.{self.method_name}({location})"

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "class_name": self.class_name,
            "file": self.file,
            "line": self.line,
            "method_name": self.method_name,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "Frame":
        return cls(
            class_name=data["class_name"],
            method_name=data["method_name"],
            file=data.get("file"),
            line=data.get("line"),
        )


@dataclass(frozen=True, slots=True)
class TraceSegment:
    """One exception in a trace: the outermost one or a "Caused by" link."""

    exception_type: str
    message: str | None = None
    frames: tuple[Frame, ...] = ()

    def __post_init__(self) -> None:
        if not _QUALIFIED_RE.match(self.exception_type):
            raise ValueError(
                f"exception_type must be a qualified identifier, got {self.exception_type!r}"
            )
        if self.message is not None and "\n" in self.message:
            raise ValueError("segment message must be a single line")
        object.__setattr__(self, "frames", tuple(self.frames))

    def render_header(self) -> str:
        if self.message is None:
            return self.exception_type
        if self.message == "":
            return self.exception_type + ":"
        return f"{self.exception_type}: {self.message}"

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "exception_type": self.exception_type,
            "frames": [f.to_jsonable() for f in self.frames],
            "message": self.message,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "TraceSegment":
        return cls(
            exception_type=data["exception_type"],
            message=data.get("message"),
            frames=tuple(Frame.from_jsonable(f) for f in data.get("frames", [])),
        )


@dataclass(frozen=True, slots=True)
class StackTrace:
    """A parsed stack trace: outermost segment first, then "Caused by" chains.

    ``raw`` preserves the source text for provenance and is excluded from
    equality; two traces are equal when their structure is equal.
    """

    segments: tuple[TraceSegment, ...]
    raw: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("stack trace needs at least one segment")

    def render(self, include_line_numbers: bool = True) -> str:
        """Canonical text form; re-parsing it yields an equal StackTrace."""
        lines: list[str] = []
        for i, seg in enumerate(self.segments):
            header = seg.render_header()
            lines.append(header if i == 0 else f"Caused by: {header}")
            lines.extend(f.render(include_line_numbers) for f in seg.frames)
        return "\n".join(lines)

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "raw": self.raw,
            "segments": [s.to_jsonable() for s in self.segments],
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "StackTrace":
        return cls(
            segments=tuple(TraceSegment.from_jsonable(s) for s in data["segments"]),
            raw=data.get("raw", ""),
        )


# ---------------------------------------------------------------------------
# Queries and result pages
# ---------------------------------------------------------------------------

MAX_CONTEXT_LINES = 7


@dataclass(frozen=True, slots=True)
class ErrorQuery:
    """The selected error: message text plus optional trace and code context."""

    message: str
    raw_stack_trace: str | None = None
    parsed_trace: StackTrace | None = None
    code_context: str | None = None

    def __post_init__(self) -> None:
        if not self.message.strip():
            raise ValueError("query message must be non-empty")
        if self.parsed_trace is not None and self.raw_stack_trace is None:
            raise ValueError("parsed_trace requires raw_stack_trace")
        if self.code_context is not None:
            n = len(self.code_context.splitlines())
            if n > MAX_CONTEXT_LINES:
                raise ValueError(f"code_context has {n} lines, limit is {MAX_CONTEXT_LINES}")

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "code_context": self.code_context,
            "message": self.message,
            "parsed_trace": self.parsed_trace.to_jsonable() if self.parsed_trace else None,
            "raw_stack_trace": self.raw_stack_trace,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "ErrorQuery":
        trace = data.get("parsed_trace")
        return cls(
            message=data["message"],
            raw_stack_trace=data.get("raw_stack_trace"),
            parsed_trace=StackTrace.from_jsonable(trace) if trace else None,
            code_context=data.get("code_context"),
        )


@dataclass(frozen=True, slots=True)
class PageContent:
    """Extracted content of one result page."""

    body_text: str = ""
    code_blocks: tuple[str, ...] = ()
    stack_traces: tuple[StackTrace, ...] = ()
    outlinks: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "code_blocks", tuple(self.code_blocks))
        object.__setattr__(self, "stack_traces", tuple(self.stack_traces))
        object.__setattr__(self, "outlinks", frozenset(self.outlinks))
        for link in self.outlinks:
            if canonicalize_url(link) != link:
                raise ValueError(f"outlink {link!r} is not canonical")

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "body_text": self.body_text,
            "code_blocks": list(self.code_blocks),
            "outlinks": sorted(self.outlinks),
            "stack_traces": [t.to_jsonable() for t in self.stack_traces],
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "PageContent":
        return cls(
            body_text=data.get("body_text", ""),
            code_blocks=tuple(data.get("code_blocks", [])),
            stack_traces=tuple(
                StackTrace.from_jsonable(t) for t in data.get("stack_traces", [])
            ),
            outlinks=frozenset(data.get("outlinks", [])),
        )


@dataclass(frozen=True, slots=True)
class ResultEntry:
    """One deduplicated candidate page merged across providers."""

    canonical_url: str
    original_urls: frozenset[str]
    title: str
    per_provider_positions: Mapping[str, int]
    content: PageContent = field(default_factory=PageContent)
    so_votes: int | None = None
    traffic_rank: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "original_urls", frozenset(self.original_urls))
        object.__setattr__(self, "per_provider_positions", dict(self.per_provider_positions))
        if not self.per_provider_positions:
            raise ValueError("entry needs at least one provider position")
        for provider, pos in self.per_provider_positions.items():
            if pos < 1:
                raise ValueError(f"position for {provider!r} must be >= 1, got {pos}")
        if canonicalize_url(self.canonical_url) != self.canonical_url:
            raise ValueError(f"canonical_url {self.canonical_url!r} is not canonical")
        for url in self.original_urls:
            if canonicalize_url(url) != self.canonical_url:
                raise ValueError(
                    f"original url {url!r} does not canonicalize to {self.canonical_url!r}"
                )
        if self.traffic_rank is not None and self.traffic_rank < 1:
            raise ValueError(f"traffic_rank must be positive, got {self.traffic_rank}")

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "canonical_url": self.canonical_url,
            "content": self.content.to_jsonable(),
            "original_urls": sorted(self.original_urls),
            "per_provider_positions": dict(sorted(self.per_provider_positions.items())),
            "so_votes": self.so_votes,
            "title": self.title,
            "traffic_rank": self.traffic_rank,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "ResultEntry":
        return cls(
            canonical_url=data["canonical_url"],
            original_urls=frozenset(data["original_urls"]),
            title=data.get("title", ""),
            per_provider_positions=dict(data["per_provider_positions"]),
            content=PageContent.from_jsonable(data.get("content", {})),
            so_votes=data.get("so_votes"),
            traffic_rank=data.get("traffic_rank"),
        )


@dataclass(frozen=True, slots=True)
class Corpus:
    """Immutable set of candidate entries for one query.

    ``built_at`` is wall-clock metadata: excluded from equality and from the
    content hash that identifies a run.
    """

    query: ErrorQuery
    entries: tuple[ResultEntry, ...]
    built_at: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        urls = [e.canonical_url for e in self.entries]
        if len(set(urls)) != len(urls):
            raise ValueError("corpus entries must have distinct canonical URLs")
        if urls != sorted(urls):
            raise ValueError("corpus entries must be sorted by canonical URL")

    def urls(self) -> tuple[str, ...]:
        return tuple(e.canonical_url for e in self.entries)

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "built_at": self.built_at,
            "entries": [e.to_jsonable() for e in self.entries],
            "query": self.query.to_jsonable(),
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "Corpus":
        return cls(
            query=ErrorQuery.from_jsonable(data["query"]),
            entries=tuple(ResultEntry.from_jsonable(e) for e in data["entries"]),
            built_at=data.get("built_at", 0.0),
        )


# ---------------------------------------------------------------------------
# Scores
# ---------------------------------------------------------------------------

_COMPOSITE_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class ScoreVector:
    """All per-result scores: seven base metrics, three composites, final fusion.

    Component scores live in [0, 1]; ``s_final`` is the weighted sum of the
    enabled composites and is bounded by the sum of their weights.
    """

    s_sew: float
    s_cnt: float
    s_st: float
    s_cc: float
    s_so: float
    s_tt: float
    s_pr: float
    s_str: float
    s_pop: float
    s_cxt: float
    s_ser: float
    s_final: float

    def __post_init__(self) -> None:
        for name in ("s_sew", "s_cnt", "s_st", "s_cc", "s_so", "s_tt",
                     "s_pr", "s_str", "s_pop", "s_cxt", "s_ser"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {value}")
        if self.s_final < 0.0:
            raise ValueError(f"s_final must be >= 0, got {self.s_final}")
        if abs(self.s_pop - (self.s_so + self.s_str + self.s_pr) / 3.0) > _COMPOSITE_TOL:
            raise ValueError("s_pop must be the mean of (s_so, s_str, s_pr)")
        if abs(self.s_cxt - (self.s_st + self.s_cc) / 2.0) > _COMPOSITE_TOL:
            raise ValueError("s_cxt must be the mean of (s_st, s_cc)")
        if abs(self.s_ser - self.s_sew * self.s_tt) > _COMPOSITE_TOL:
            raise ValueError("s_ser must be s_sew * s_tt")

    def to_jsonable(self) -> dict[str, float]:
        return {
            "s_cc": self.s_cc,
            "s_cnt": self.s_cnt,
            "s_cxt": self.s_cxt,
            "s_final": self.s_final,
            "s_pop": self.s_pop,
            "s_pr": self.s_pr,
            "s_ser": self.s_ser,
            "s_sew": self.s_sew,
            "s_so": self.s_so,
            "s_st": self.s_st,
            "s_str": self.s_str,
            "s_tt": self.s_tt,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, float]) -> "ScoreVector":
        return cls(**{k: data[k] for k in (
            "s_sew", "s_cnt", "s_st", "s_cc", "s_so", "s_tt",
            "s_pr", "s_str", "s_pop", "s_cxt", "s_ser", "s_final")})


def canonical_json(jsonable: Any) -> str:
    """Serialize a jsonable structure deterministically (sorted keys, compact)."""
    return json.dumps(jsonable, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
