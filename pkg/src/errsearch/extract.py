"""Turn fetched result-page HTML into structured page content.

Extraction is best-effort over dirty, possibly malformed markup: a forgiving
stdlib tokenizer rather than a validating parser.  Stack traces are recognized
by a Java-style grammar (header line, ``at pkg.Class.method(File.ext:NN)``
frames, ``Caused by:`` chains) in both code blocks and raw body text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html.parser import HTMLParser
from urllib.parse import urljoin

from .model import (
    Frame,
    MalformedUrl,
    PageContent,
    StackTrace,
    TraceSegment,
    canonicalize_url,
)

__all__ = [
    "NotAStackTrace",
    "RawPage",
    "detect_stack_traces",
    "extract_page_content",
    "extract_title",
    "parse_stack_trace",
]


class NotAStackTrace(ValueError):
    """Raised when text contains no line matching the trace header grammar."""


@dataclass(frozen=True, slots=True)
class RawPage:
    """A fetched result page."""

    url: str
    html: str
    fetched_at: float = 0.0

    def __post_init__(self) -> None:
        if not self.html:
            raise ValueError("page html must be non-empty")


# ---------------------------------------------------------------------------
# Stack trace grammar
# ---------------------------------------------------------------------------

_IDENT = r"[A-Za-z_$][A-Za-z0-9_$]*"
_QUALIFIED = rf"{_IDENT}(?:\.{_IDENT})+"
_HEADER_RE = re.compile(
    rf'^(?:Exception in thread "[^"]*"\s+)?({_QUALIFIED})(?::\s?(.*))?$'
)
_CAUSED_RE = re.compile(rf"^Caused by:\s+({_QUALIFIED})(?::\s?(.*))?$")
_FRAME_RE = re.compile(rf"^at\s+((?:{_IDENT}\.)+<?{_IDENT}>?)\(([^()]*)\)$")
_MORE_RE = re.compile(r"^\.\.\.\s+\d+\s+more$")


def _parse_location(location: str) -> tuple[str | None, int | None]:
    location = location.strip()
    if location in ("", "Unknown Source", "Native Method"):
        return None, None
    if ":" in location:
        file, _, tail = location.rpartition(":")
        if tail.isdigit() and int(tail) >= 1:
            return file, int(tail)
    return location, None


def _parse_frame(line: str) -> Frame | None:
    match = _FRAME_RE.match(line)
    if not match:
        return None
    qualified, location = match.groups()
    class_name, _, method_name = qualified.rpartition(".")
    file, number = _parse_location(location)
    return Frame(class_name=class_name, method_name=method_name, file=file, line=number)


def _match_header(line: str) -> tuple[str, str | None] | None:
    match = _HEADER_RE.match(line)
    if not match:
        return None
    exception_type, message = match.groups()
    return exception_type, message.strip() if message is not None else None


def _parse_trace_at(lines: list[str], start: int) -> tuple[StackTrace, int] | None:
    """Parse one trace beginning at ``lines[start]``; returns (trace, end index)."""
    header = _match_header(lines[start].strip())
    if header is None:
        return None

    segments: list[TraceSegment] = []
    seg_type, seg_message = header
    frames: list[Frame] = []
    end = start + 1

    def close_segment() -> None:
        segments.append(
            TraceSegment(exception_type=seg_type, message=seg_message, frames=tuple(frames))
        )

    while end < len(lines):
        line = lines[end].strip()
        if not line:
            break
        caused = _CAUSED_RE.match(line)
        if caused:
            close_segment()
            seg_type, seg_message = caused.group(1), (
                caused.group(2).strip() if caused.group(2) is not None else None
            )
            frames = []
            end += 1
            continue
        frame = _parse_frame(line)
        if frame is not None:
            frames.append(frame)
            end += 1
            continue
        if _MORE_RE.match(line):
            end += 1
            continue
        break
    close_segment()

    try:
        trace = StackTrace(
            segments=tuple(segments), raw="\n".join(lines[start:end])
        )
    except ValueError:
        return None
    return trace, end


def parse_stack_trace(text: str) -> StackTrace:
    """Parse the first stack trace found in ``text``.

    Raises:
        NotAStackTrace: when no line matches the header grammar.
    """
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if _match_header(line.strip()) is not None:
            parsed = _parse_trace_at(lines, i)
            if parsed is not None:
                return parsed[0]
    raise NotAStackTrace("no stack trace header found")


def detect_stack_traces(content_blocks: list[str] | tuple[str, ...]) -> tuple[StackTrace, ...]:
    """Find every stack trace across the given text blocks, in document order.

    Scanning is stricter than :func:`parse_stack_trace`: a detected trace must
    carry at least one frame, so lone "Dotted.Name: text" prose lines are not
    reported.  Identical traces (same canonical rendering) are reported once.
    """
    found: list[StackTrace] = []
    seen: set[str] = set()
    for block in content_blocks:
        lines = block.splitlines()
        i = 0
        while i < len(lines):
            if _match_header(lines[i].strip()) is None:
                i += 1
                continue
            parsed = _parse_trace_at(lines, i)
            if parsed is None:
                i += 1
                continue
            trace, end = parsed
            if not any(seg.frames for seg in trace.segments):
                i = end
                continue
            key = trace.render()
            if key not in seen:
                seen.add(key)
                found.append(trace)
            i = end
    return tuple(found)


# ---------------------------------------------------------------------------
# HTML extraction
# ---------------------------------------------------------------------------

_BLOCK_TAGS = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt",
    "fieldset", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "header", "hr", "li", "main", "nav", "ol", "p", "pre", "section", "table",
    "td", "th", "tr", "ul",
}
_SKIP_TAGS = {"script", "style", "noscript"}


class _PageExtractor(HTMLParser):
    """Single-pass tolerant extractor for title, text, code blocks, links."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.title_parts: list[str] = []
        self.text_parts: list[str] = []
        self.code_blocks: list[str] = []
        self.hrefs: list[str] = []
        self._in_title = False
        self._skip_depth = 0
        self._code_tag: str | None = None
        self._code_depth = 0
        self._code_parts: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
            return
        if tag == "title":
            self._in_title = True
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.hrefs.append(value)
        if tag in ("pre", "code"):
            if self._code_tag is None:
                self._code_tag = tag
                self._code_depth = 1
                self._code_parts = []
            elif tag == self._code_tag:
                self._code_depth += 1
        if tag in _BLOCK_TAGS:
            self.text_parts.append("\n")

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "title":
            self._in_title = False
        if tag == self._code_tag:
            self._code_depth -= 1
            if self._code_depth <= 0:
                block = "".join(self._code_parts).strip("\n")
                if block.strip():
                    self.code_blocks.append(block)
                self._code_tag = None
        if tag in _BLOCK_TAGS:
            self.text_parts.append("\n")

    def handle_data(self, data: str) -> None:
        if self._skip_depth:
            return
        if self._in_title:
            self.title_parts.append(data)
        if self._code_tag is not None:
            self._code_parts.append(data)
        self.text_parts.append(data)


def _collapse_text(raw: str) -> str:
    lines = []
    for line in raw.splitlines():
        collapsed = " ".join(line.split())
        if collapsed:
            lines.append(collapsed)
    return "\n".join(lines)


def _run_extractor(html: str) -> _PageExtractor:
    extractor = _PageExtractor()
    try:
        extractor.feed(html)
        extractor.close()
    except Exception:
        # Tag soup beyond what the tokenizer tolerates: keep whatever was
        # collected before the failure.
        pass
    return extractor


def extract_title(page: RawPage) -> str:
    """Text of the title element, whitespace-collapsed; empty when absent."""
    extractor = _run_extractor(page.html)
    return " ".join("".join(extractor.title_parts).split())


def extract_page_content(page: RawPage) -> PageContent:
    """Extract body text, code blocks, stack traces and outlinks from a page.

    Never fails on malformed markup; the worst case is empty content.
    Outlinks are canonicalized absolute anchor targets with self-links
    excluded.
    """
    extractor = _run_extractor(page.html)
    body_text = _collapse_text("".join(extractor.text_parts))
    code_blocks = tuple(extractor.code_blocks)

    try:
        self_url = canonicalize_url(page.url)
    except MalformedUrl:
        self_url = None
    outlinks = set()
    for href in extractor.hrefs:
        try:
            link = canonicalize_url(urljoin(page.url, href))
        except MalformedUrl:
            continue
        if link != self_url:
            outlinks.add(link)

    traces = detect_stack_traces(list(code_blocks) + [body_text])
    return PageContent(
        body_text=body_text,
        code_blocks=code_blocks,
        stack_traces=traces,
        outlinks=frozenset(outlinks),
    )
