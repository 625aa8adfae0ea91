"""Shared test utilities: random model builders and independent oracles.

The oracles here deliberately re-derive results through a different code path
than the library (naive per-bit loops, dense numpy matrices, a flat
re-implementation of aggregation + scoring) so agreement is meaningful.
"""

from __future__ import annotations

import random

import numpy as np

from errsearch.model import (
    Corpus,
    ErrorQuery,
    Frame,
    PageContent,
    ResultEntry,
    StackTrace,
    TraceSegment,
)
from errsearch.textsim import FINGERPRINT_BITS, TokenBag, token_hash

PROVIDER_IDS = ("google", "bing", "yahoo", "stackoverflow")

WORDS = (
    "null", "pointer", "exception", "widget", "disposed", "thread", "socket",
    "timeout", "index", "bounds", "driver", "class", "loader", "stream",
    "closed", "resource", "bundle", "plugin", "view", "workbench", "swt",
    "table", "viewer", "refresh", "listener", "dispose", "lazy", "proxy",
    "session", "servlet", "binding", "heap", "space", "parse", "format",
)

EXCEPTION_TYPES = (
    "java.lang.NullPointerException",
    "java.io.IOException",
    "java.lang.IllegalStateException",
    "org.eclipse.swt.SWTException",
    "java.sql.SQLException",
)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def simhash_oracle(bag: TokenBag) -> int:
    """Brute-force per-bit signed sums, one bit position at a time."""
    bits = 0
    for i in range(FINGERPRINT_BITS):
        total = 0
        for token, count in bag.counts.items():
            if (token_hash(token) >> i) & 1:
                total += count
            else:
                total -= count
        if total > 0:
            bits |= 1 << i
    return bits


def hamming_oracle(a: int, b: int) -> int:
    """Bit-loop popcount of the XOR."""
    x = a ^ b
    count = 0
    for _ in range(FINGERPRINT_BITS):
        count += x & 1
        x >>= 1
    return count


def pagerank_oracle(corpus: Corpus, damping: float, tolerance: float,
                    max_iterations: int = 100) -> dict[str, float]:
    """Dense numpy power iteration with uniform teleport and dangling spread."""
    urls = list(corpus.urls())
    n = len(urls)
    if n == 0:
        return {}
    index = {url: i for i, url in enumerate(urls)}
    transition = np.zeros((n, n))
    dangling = np.zeros(n, dtype=bool)
    for i, entry in enumerate(corpus.entries):
        targets = [index[u] for u in entry.content.outlinks if u in index]
        if not targets:
            dangling[i] = True
            continue
        for j in targets:
            transition[i, j] = 1.0 / len(targets)

    x = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        dangling_mass = x[dangling].sum()
        fresh = (1.0 - damping) / n + damping * (x @ transition + dangling_mass / n)
        if np.abs(fresh - x).sum() < tolerance:
            x = fresh
            break
        x = fresh
    return {url: float(x[index[url]]) for url in urls}


# ---------------------------------------------------------------------------
# Random model builders
# ---------------------------------------------------------------------------


def random_bag(rng: random.Random, size: int | None = None,
               vocabulary: tuple[str, ...] = WORDS) -> TokenBag:
    size = size if size is not None else rng.randint(1, 30)
    counts: dict[str, int] = {}
    for _ in range(size):
        token = rng.choice(vocabulary)
        counts[token] = counts.get(token, 0) + 1
    return TokenBag(counts)


def random_trace(rng: random.Random) -> StackTrace:
    segments = []
    for s in range(rng.randint(1, 2)):
        frames = tuple(
            Frame(
                class_name=f"com.test.pkg{rng.randint(1, 4)}.Cls{rng.randint(1, 9)}",
                method_name=rng.choice(("run", "apply", "handle", "update")),
                file=f"Cls{rng.randint(1, 9)}.java",
                line=rng.randint(1, 500),
            )
            for _ in range(rng.randint(0, 4))
        )
        segments.append(
            TraceSegment(
                exception_type=rng.choice(EXCEPTION_TYPES),
                message=" ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 5))) or None,
                frames=frames,
            )
        )
    trace = StackTrace(segments=tuple(segments))
    return StackTrace(segments=trace.segments, raw=trace.render())


def random_query(rng: random.Random, with_trace: bool = True,
                 with_context: bool = True) -> ErrorQuery:
    message = " ".join(rng.choice(WORDS) for _ in range(rng.randint(2, 6)))
    trace = random_trace(rng) if with_trace else None
    context = None
    if with_context:
        context = "\n".join(
            f"{rng.choice(WORDS)} {rng.choice(WORDS)}();"
            for _ in range(rng.randint(1, 7))
        )
    return ErrorQuery(
        message=message,
        raw_stack_trace=trace.raw if trace else None,
        parsed_trace=trace,
        code_context=context,
    )


def random_entry(rng: random.Random, url: str, peer_urls: list[str]) -> ResultEntry:
    positions = {
        provider: rng.randint(1, 15)
        for provider in PROVIDER_IDS
        if rng.random() < 0.6
    }
    if not positions:
        positions = {rng.choice(PROVIDER_IDS): rng.randint(1, 15)}
    traces = tuple(random_trace(rng) for _ in range(rng.randint(0, 2)))
    blocks = tuple(
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 12)))
        for _ in range(rng.randint(0, 2))
    )
    outlinks = frozenset(u for u in peer_urls if u != url and rng.random() < 0.3)
    return ResultEntry(
        canonical_url=url,
        original_urls=frozenset({url}),
        title=" ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 8))),
        per_provider_positions=positions,
        content=PageContent(
            body_text=" ".join(rng.choice(WORDS) for _ in range(10)),
            code_blocks=blocks,
            stack_traces=traces,
            outlinks=outlinks,
        ),
        so_votes=rng.randint(-5, 60) if "stackoverflow" in positions and rng.random() < 0.8 else None,
        traffic_rank=rng.randint(1, 10**6) if rng.random() < 0.7 else None,
    )


def random_corpus(rng: random.Random, n_entries: int | None = None,
                  query: ErrorQuery | None = None) -> Corpus:
    n = n_entries if n_entries is not None else rng.randint(1, 8)
    urls = [f"s{k:02d}x{rng.randrange(10**4):04d}.example.com/page" for k in range(n)]
    entries = tuple(random_entry(rng, url, urls) for url in urls)
    return Corpus(
        query=query or random_query(rng),
        entries=entries,
        built_at=0.0,
    )
