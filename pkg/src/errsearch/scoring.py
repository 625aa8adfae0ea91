"""Per-result base metrics and their fusion into final ranking scores.

Seven base metrics are computed per corpus entry: engine weight, title
similarity, stack-trace match, code-context match, vote score, top-ten
position, PageRank and traffic rank.  Three composites (popularity, context
relevance, engine recommendation) and the weighted final score are derived
from them.  All score maps are keyed by canonical URL and every value lies in
[0, 1]; absent signals score 0 rather than excluding an entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, TypeVar

from .model import Corpus, ErrorQuery, ResultEntry, ScoreVector, StackTrace
from .providers import DEFAULT_ENGINE_WEIGHTS
from .textsim import TokenBag, cosine_similarity, hamming, simhash, tokenize

__all__ = [
    "BaseScores",
    "COMPONENTS",
    "PAGERANK_MAX_ITERATIONS",
    "ScoreConfig",
    "UnknownProvider",
    "codecontext_scores",
    "compose_scores",
    "direct_minmax",
    "engine_weight_score",
    "inverted_minmax",
    "pagerank_scores",
    "raw_pagerank",
    "score_corpus",
    "so_vote_scores",
    "stacktrace_scores",
    "title_score",
    "topten_score",
    "traffic_rank_scores",
]

COMPONENTS = ("cnt", "cxt", "pop", "ser")
PAGERANK_MAX_ITERATIONS = 100


class UnknownProvider(KeyError):
    """An entry was returned by a provider with no configured weight."""


@dataclass(frozen=True, slots=True)
class ScoreConfig:
    """Knobs for one scoring run.

    ``engine_weights`` of None means "resolve from the provider descriptors";
    the pipeline echoes back the resolved mapping.
    """

    enabled_components: frozenset[str] = frozenset({"cnt", "cxt", "ser"})
    component_weights: Mapping[str, float] = field(
        default_factory=lambda: {c: 1.0 for c in COMPONENTS}
    )
    engine_weights: Mapping[str, float] | None = None
    pagerank_damping: float = 0.85
    pagerank_tolerance: float = 1e-8
    min_final_score: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "enabled_components", frozenset(self.enabled_components))
        object.__setattr__(self, "component_weights", dict(self.component_weights))
        if self.engine_weights is not None:
            object.__setattr__(self, "engine_weights", dict(self.engine_weights))
        if not self.enabled_components:
            raise ValueError("enabled_components must be non-empty")
        unknown = self.enabled_components - set(COMPONENTS)
        if unknown:
            raise ValueError(f"unknown components: {sorted(unknown)}")
        if any(w < 0 for w in self.component_weights.values()):
            raise ValueError("component weights must be >= 0")
        if not 0.0 < self.pagerank_damping < 1.0:
            raise ValueError(f"pagerank_damping must be in (0,1), got {self.pagerank_damping}")
        if self.pagerank_tolerance <= 0:
            raise ValueError("pagerank_tolerance must be positive")
        if self.min_final_score < 0:
            raise ValueError("min_final_score must be >= 0")

    def weight_of(self, component: str) -> float:
        return float(self.component_weights.get(component, 1.0))

    def to_jsonable(self) -> dict:
        return {
            "component_weights": dict(sorted(self.component_weights.items())),
            "enabled_components": sorted(self.enabled_components),
            "engine_weights": (
                dict(sorted(self.engine_weights.items()))
                if self.engine_weights is not None else None
            ),
            "min_final_score": self.min_final_score,
            "pagerank_damping": self.pagerank_damping,
            "pagerank_tolerance": self.pagerank_tolerance,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping) -> "ScoreConfig":
        kwargs = {}
        if "enabled_components" in data:
            kwargs["enabled_components"] = frozenset(data["enabled_components"])
        if "component_weights" in data:
            kwargs["component_weights"] = dict(data["component_weights"])
        if data.get("engine_weights") is not None:
            kwargs["engine_weights"] = dict(data["engine_weights"])
        for key in ("pagerank_damping", "pagerank_tolerance", "min_final_score"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)


@dataclass(frozen=True, slots=True)
class BaseScores:
    """The seven base metrics of one entry, before composition."""

    s_sew: float
    s_cnt: float
    s_st: float
    s_cc: float
    s_so: float
    s_tt: float
    s_pr: float
    s_str: float


K = TypeVar("K")


def inverted_minmax(values: Mapping[K, float]) -> dict[K, float]:
    """Min-max normalize where smaller is better: min -> 1.0, max -> 0.0.

    When all values coincide (including a single element) everything scores
    1.0, since each attains the observed optimum.
    """
    if not values:
        return {}
    low, high = min(values.values()), max(values.values())
    if high == low:
        return {k: 1.0 for k in values}
    return {k: 1.0 - (v - low) / (high - low) for k, v in values.items()}


def direct_minmax(values: Mapping[K, float]) -> dict[K, float]:
    """Min-max normalize where larger is better: max -> 1.0, min -> 0.0."""
    if not values:
        return {}
    low, high = min(values.values()), max(values.values())
    if high == low:
        return {k: 1.0 for k in values}
    return {k: (v - low) / (high - low) for k, v in values.items()}


# ---------------------------------------------------------------------------
# Base metrics
# ---------------------------------------------------------------------------


def engine_weight_score(entry: ResultEntry, weights: Mapping[str, float]) -> float:
    """Sum of the weights of the providers that returned the entry, capped at 1."""
    total = 0.0
    for provider_id in entry.per_provider_positions:
        if provider_id not in weights:
            raise UnknownProvider(provider_id)
        total += weights[provider_id]
    return min(1.0, total)


def title_score(query: ErrorQuery, entry: ResultEntry) -> float:
    """Cosine similarity between the query message and the result title."""
    return cosine_similarity(tokenize(query.message), tokenize(entry.title))


def _trace_bag(trace: StackTrace) -> TokenBag:
    # Frame line numbers differ across user programs; strip them before hashing.
    return tokenize(trace.render(include_line_numbers=False))


def stacktrace_scores(query: ErrorQuery, corpus: Corpus) -> dict[str, float]:
    """Inverted min-max of SimHash Hamming distances between stack traces.

    Per entry the distance is the minimum over its traces against the query
    trace.  Entries without traces, or any corpus when the query has no
    parsed trace, score 0.
    """
    scores = {url: 0.0 for url in corpus.urls()}
    if query.parsed_trace is None:
        return scores
    query_fp = simhash(_trace_bag(query.parsed_trace))
    distances: dict[str, float] = {}
    for entry in corpus.entries:
        if entry.content.stack_traces:
            distances[entry.canonical_url] = min(
                hamming(simhash(_trace_bag(trace)), query_fp)
                for trace in entry.content.stack_traces
            )
    scores.update(inverted_minmax(distances))
    return scores


def codecontext_scores(query: ErrorQuery, corpus: Corpus) -> dict[str, float]:
    """Same scheme as stack traces, between code context and code blocks."""
    scores = {url: 0.0 for url in corpus.urls()}
    if not query.code_context:
        return scores
    query_fp = simhash(tokenize(query.code_context))
    distances: dict[str, float] = {}
    for entry in corpus.entries:
        if entry.content.code_blocks:
            distances[entry.canonical_url] = min(
                hamming(simhash(tokenize(block)), query_fp)
                for block in entry.content.code_blocks
            )
    scores.update(inverted_minmax(distances))
    return scores


def so_vote_scores(corpus: Corpus) -> dict[str, float]:
    """Direct min-max of StackOverflow vote scores; entries without votes score 0."""
    scores = {url: 0.0 for url in corpus.urls()}
    votes = {
        e.canonical_url: float(e.so_votes)
        for e in corpus.entries if e.so_votes is not None
    }
    scores.update(direct_minmax(votes))
    return scores


def topten_score(entry: ResultEntry) -> float:
    """Linear score of the mean top-10 position; no top-10 presence scores 0."""
    top = [p for p in entry.per_provider_positions.values() if p <= 10]
    if not top:
        return 0.0
    mean_position = sum(top) / len(top)
    return 1.0 - (mean_position - 1.0) / 10.0


def raw_pagerank(
    corpus: Corpus,
    damping: float = 0.85,
    tolerance: float = 1e-8,
    max_iterations: int = PAGERANK_MAX_ITERATIONS,
) -> dict[str, float]:
    """Damped power iteration over the corpus outlink graph; sums to 1.

    Nodes are corpus entries; A links to B iff B's canonical URL appears in
    A's outlinks.  Teleport is uniform and dangling mass is redistributed
    uniformly.  Iteration stops when the L1 change drops below ``tolerance``
    or after ``max_iterations`` rounds.
    """
    urls = corpus.urls()
    n = len(urls)
    if n == 0:
        return {}
    in_corpus = set(urls)
    targets = {
        e.canonical_url: sorted(e.content.outlinks & in_corpus) for e in corpus.entries
    }

    ranks = {url: 1.0 / n for url in urls}
    for _ in range(max_iterations):
        dangling = sum(ranks[url] for url in urls if not targets[url])
        base = (1.0 - damping) / n + damping * dangling / n
        fresh = {url: base for url in urls}
        for url in urls:
            out = targets[url]
            if out:
                share = damping * ranks[url] / len(out)
                for target in out:
                    fresh[target] += share
        delta = sum(abs(fresh[url] - ranks[url]) for url in urls)
        ranks = fresh
        if delta < tolerance:
            break
    return ranks


def pagerank_scores(
    corpus: Corpus, damping: float = 0.85, tolerance: float = 1e-8
) -> dict[str, float]:
    """Min-max normalized PageRank; an edgeless (uniform) graph scores all 1.0."""
    return direct_minmax(raw_pagerank(corpus, damping, tolerance))


def traffic_rank_scores(corpus: Corpus) -> dict[str, float]:
    """Inverted min-max of traffic ranks (rank 1 is most popular -> score 1)."""
    scores = {url: 0.0 for url in corpus.urls()}
    ranks = {
        e.canonical_url: float(e.traffic_rank)
        for e in corpus.entries if e.traffic_rank is not None
    }
    scores.update(inverted_minmax(ranks))
    return scores


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def compose_scores(
    base: Mapping[str, BaseScores], config: ScoreConfig
) -> dict[str, ScoreVector]:
    """Derive composites and the weighted final score for every entry."""
    vectors = {}
    for url, b in base.items():
        s_pop = (b.s_so + b.s_str + b.s_pr) / 3.0
        s_cxt = (b.s_st + b.s_cc) / 2.0
        s_ser = b.s_sew * b.s_tt
        by_component = {"cnt": b.s_cnt, "cxt": s_cxt, "pop": s_pop, "ser": s_ser}
        s_final = sum(
            config.weight_of(c) * by_component[c] for c in sorted(config.enabled_components)
        )
        vectors[url] = ScoreVector(
            s_sew=b.s_sew, s_cnt=b.s_cnt, s_st=b.s_st, s_cc=b.s_cc,
            s_so=b.s_so, s_tt=b.s_tt, s_pr=b.s_pr, s_str=b.s_str,
            s_pop=s_pop, s_cxt=s_cxt, s_ser=s_ser, s_final=s_final,
        )
    return vectors


def score_corpus(
    query: ErrorQuery, corpus: Corpus, config: ScoreConfig
) -> dict[str, ScoreVector]:
    """Compute the full ScoreVector for every corpus entry."""
    weights = config.engine_weights if config.engine_weights is not None else DEFAULT_ENGINE_WEIGHTS
    st = stacktrace_scores(query, corpus)
    cc = codecontext_scores(query, corpus)
    so = so_vote_scores(corpus)
    pr = pagerank_scores(corpus, config.pagerank_damping, config.pagerank_tolerance)
    tr = traffic_rank_scores(corpus)

    base = {}
    for entry in corpus.entries:
        url = entry.canonical_url
        base[url] = BaseScores(
            s_sew=engine_weight_score(entry, weights),
            s_cnt=title_score(query, entry),
            s_st=st[url],
            s_cc=cc[url],
            s_so=so[url],
            s_tt=topten_score(entry),
            s_pr=pr[url],
            s_str=tr[url],
        )
    return compose_scores(base, config)
