"""Context-aware meta-search and ranking for programming errors and exceptions."""

from .model import (
    Corpus,
    ErrorQuery,
    Frame,
    MalformedUrl,
    PageContent,
    ResultEntry,
    ScoreVector,
    StackTrace,
    TraceSegment,
    canonical_json,
    canonicalize_url,
)
from .extract import NotAStackTrace, RawPage, detect_stack_traces, extract_page_content, parse_stack_trace
from .pipeline import InvalidQuery, NoProvidersAvailable, RankedItem, RankedResults, RuntimeOptions, run_search
from .providers import (
    CalibrationSample,
    FixtureSet,
    ProviderDescriptor,
    ProviderResult,
    aggregate,
    calibrate_engine_weights,
    fetch_results,
)
from .scoring import ScoreConfig, score_corpus
from .textsim import Fingerprint, TokenBag, cosine_similarity, hamming, simhash, tokenize

__version__ = "0.1.0"

__all__ = [
    "CalibrationSample",
    "Corpus",
    "ErrorQuery",
    "Fingerprint",
    "FixtureSet",
    "Frame",
    "InvalidQuery",
    "MalformedUrl",
    "NoProvidersAvailable",
    "NotAStackTrace",
    "PageContent",
    "ProviderDescriptor",
    "ProviderResult",
    "RankedItem",
    "RankedResults",
    "RawPage",
    "ResultEntry",
    "RuntimeOptions",
    "ScoreConfig",
    "ScoreVector",
    "StackTrace",
    "TokenBag",
    "TraceSegment",
    "aggregate",
    "calibrate_engine_weights",
    "canonical_json",
    "canonicalize_url",
    "cosine_similarity",
    "detect_stack_traces",
    "extract_page_content",
    "fetch_results",
    "hamming",
    "parse_stack_trace",
    "run_search",
    "score_corpus",
    "simhash",
    "tokenize",
    "__version__",
]
