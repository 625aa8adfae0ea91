"""Flat-file persistence and caching of ranked runs.

One JSON file per run under ``runs/<run_id>.json`` and one per cached query
under ``cache/<query_hash>.json``.  Writes are atomic (temp file + rename), so
concurrent saves of distinct ids never corrupt each other and readers never
observe partial files.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .model import Corpus, ErrorQuery, canonical_json
from .pipeline import RankedResults
from .scoring import ScoreConfig

__all__ = [
    "CorruptRecord",
    "IoFailure",
    "NotFound",
    "RunRecord",
    "cache_lookup",
    "cache_save",
    "compute_query_hash",
    "compute_run_id",
    "load_run",
    "save_run",
]


class IoFailure(OSError):
    """Filesystem failure while persisting or reading a record."""


class NotFound(KeyError):
    """No record stored under the requested id."""


class CorruptRecord(ValueError):
    """Stored bytes do not parse or violate model invariants."""


_RUN_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def compute_run_id(query: ErrorQuery, config: ScoreConfig, corpus: Corpus) -> str:
    """Deterministic content hash of query + configuration + corpus entries."""
    payload = canonical_json(
        {
            "config": config.to_jsonable(),
            "entries": [e.to_jsonable() for e in corpus.entries],
            "query": query.to_jsonable(),
        }
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def compute_query_hash(query: ErrorQuery, config: ScoreConfig) -> str:
    """Deterministic hash identifying a (query, configuration) pair for caching."""
    payload = canonical_json({"config": config.to_jsonable(), "query": query.to_jsonable()})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True, slots=True)
class RunRecord:
    """One persisted search run addressed by its content hash."""

    run_id: str
    results: RankedResults
    created_at: float = field(default_factory=time.time)

    def __post_init__(self) -> None:
        if not _RUN_ID_RE.match(self.run_id):
            raise ValueError(f"run_id must be filesystem-safe, got {self.run_id!r}")

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "created_at": self.created_at,
            "results": self.results.to_jsonable(),
            "run_id": self.run_id,
        }

    @classmethod
    def from_jsonable(cls, data: dict[str, Any]) -> "RunRecord":
        return cls(
            run_id=data["run_id"],
            results=RankedResults.from_jsonable(data["results"]),
            created_at=data["created_at"],
        )


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def run_path(run_id: str, root: str | Path) -> Path:
    return Path(root) / "runs" / f"{run_id}.json"


def save_run(record: RunRecord, root: str | Path) -> Path:
    """Write the record atomically; same content overwrites idempotently.

    Raises:
        IoFailure: when the root is not writable.
    """
    path = run_path(record.run_id, root)
    try:
        _atomic_write(path, canonical_json(record.to_jsonable()))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def load_run(run_id: str, root: str | Path) -> RunRecord:
    """Load and validate a stored run.

    Raises:
        NotFound: no file for ``run_id``.
        CorruptRecord: parse failure or invariant violation.
    """
    if not _RUN_ID_RE.match(run_id):
        # ids are content hashes; anything else (e.g. path fragments) cannot exist
        raise NotFound(run_id)
    path = run_path(run_id, root)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise NotFound(run_id) from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        record = RunRecord.from_jsonable(json.loads(text))
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptRecord(f"{path}: {exc}") from exc
    if record.run_id != run_id:
        raise CorruptRecord(f"{path}: stored run_id {record.run_id!r} != {run_id!r}")
    return record


def cache_path(query_hash: str, root: str | Path) -> Path:
    return Path(root) / "cache" / f"{query_hash}.json"


def cache_save(query_hash: str, results: RankedResults, root: str | Path,
               now: float | None = None) -> Path:
    path = cache_path(query_hash, root)
    payload = {
        "results": results.to_jsonable(),
        "saved_at": time.time() if now is None else now,
    }
    try:
        _atomic_write(path, canonical_json(payload))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def cache_lookup(query_hash: str, max_age: float, root: str | Path,
                 now: float | None = None) -> RankedResults | None:
    """Return the cached results iff present, parseable, and younger than max_age."""
    path = cache_path(query_hash, root)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        saved_at = float(data["saved_at"])
        results = RankedResults.from_jsonable(data["results"])
    except (OSError, ValueError, KeyError, TypeError):
        return None
    current = time.time() if now is None else now
    if current - saved_at > max_age:
        return None
    return results
