"""Evaluation harness: run score-combination configurations over a labeled
query set and report solutions-found and average solution ranks.

A gold set maps query ids to the accepted solution URLs.  For each
configuration the harness records how many queries had a solution within the
top 10 and top 20 results (Soln@10 / Soln@20) and the mean rank of the found
solutions (averaged only over queries where a solution was found).  Reports
serialize to canonical JSON, render as a text table or CSV, and can be
plotted to PNG files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

from .model import ErrorQuery, canonical_json, canonicalize_url
from .pipeline import RankedResults, RuntimeOptions, run_search
from .providers import ProviderDescriptor
from .scoring import COMPONENTS, ScoreConfig

__all__ = [
    "EvalReport",
    "EvalRow",
    "GoldQuery",
    "GoldSet",
    "MissingRun",
    "config_name",
    "default_matrix_configs",
    "evaluate",
    "parse_report",
    "render_report",
    "render_table",
    "run_matrix",
    "solution_rank",
    "write_report_files",
]


class MissingRun(KeyError):
    """A gold query has no corresponding run."""


@dataclass(frozen=True, slots=True)
class GoldQuery:
    """One labeled query: the error plus its accepted solution URLs."""

    query_id: str
    query: ErrorQuery
    solution_urls: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "solution_urls", frozenset(self.solution_urls))
        if not self.solution_urls:
            raise ValueError(f"gold query {self.query_id!r} needs solution URLs")
        for url in self.solution_urls:
            if canonicalize_url(url) != url:
                raise ValueError(f"solution URL {url!r} is not canonical")


@dataclass(frozen=True, slots=True)
class GoldSet:
    """The labeled query collection driving one evaluation."""

    queries: tuple[GoldQuery, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "queries", tuple(self.queries))
        ids = [q.query_id for q in self.queries]
        if len(set(ids)) != len(ids):
            raise ValueError("gold query ids must be unique")

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "GoldSet":
        return cls(
            queries=tuple(
                GoldQuery(
                    query_id=q["query_id"],
                    query=ErrorQuery.from_jsonable(q["query"]),
                    solution_urls=frozenset(q["solution_urls"]),
                )
                for q in data["queries"]
            )
        )

    @classmethod
    def load(cls, path: str | Path) -> "GoldSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonable(json.load(fh))


@dataclass(frozen=True, slots=True)
class EvalRow:
    """Metrics of one configuration over the whole gold set."""

    config_name: str
    soln_10: int
    r_10: float | None
    soln_20: int
    r_20: float | None

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "config_name": self.config_name,
            "r_10": self.r_10,
            "r_20": self.r_20,
            "soln_10": self.soln_10,
            "soln_20": self.soln_20,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "EvalRow":
        return cls(
            config_name=data["config_name"],
            soln_10=data["soln_10"],
            r_10=data["r_10"],
            soln_20=data["soln_20"],
            r_20=data["r_20"],
        )


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Rows per configuration plus the evaluated query count."""

    rows: tuple[EvalRow, ...]
    query_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        for row in self.rows:
            if not 0 <= row.soln_10 <= row.soln_20 <= self.query_count:
                raise ValueError(
                    f"row {row.config_name!r}: need soln_10 <= soln_20 <= query count"
                )

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "query_count": self.query_count,
            "rows": [row.to_jsonable() for row in self.rows],
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "EvalReport":
        return cls(
            rows=tuple(EvalRow.from_jsonable(r) for r in data["rows"]),
            query_count=data["query_count"],
        )


def solution_rank(results: RankedResults, solution_urls: frozenset[str]) -> int | None:
    """Best rank at which any accepted solution appears, or None."""
    for item in results.items:
        if item.entry.canonical_url in solution_urls:
            return item.rank
    return None


def evaluate(
    runs: Mapping[str, RankedResults], gold: GoldSet, name: str
) -> EvalRow:
    """Aggregate one configuration's runs into an EvalRow.

    Raises:
        MissingRun: when a gold query id has no run.
    """
    ranks: list[int] = []
    for gold_query in gold.queries:
        if gold_query.query_id not in runs:
            raise MissingRun(gold_query.query_id)
        rank = solution_rank(runs[gold_query.query_id], gold_query.solution_urls)
        if rank is not None:
            ranks.append(rank)

    within_10 = [r for r in ranks if r <= 10]
    within_20 = [r for r in ranks if r <= 20]
    return EvalRow(
        config_name=name,
        soln_10=len(within_10),
        r_10=sum(within_10) / len(within_10) if within_10 else None,
        soln_20=len(within_20),
        r_20=sum(within_20) / len(within_20) if within_20 else None,
    )


def config_name(config: ScoreConfig) -> str:
    """Canonical row label: enabled components in fixed display order."""
    return ",".join(c for c in COMPONENTS if c in config.enabled_components)


def default_matrix_configs(base: ScoreConfig | None = None) -> tuple[ScoreConfig, ...]:
    """The shipped component-combination ladder, keyword-only row first."""
    base = base or ScoreConfig()
    combos = (
        ("cnt",),
        ("cnt", "cxt"),
        ("cnt", "pop"),
        ("cnt", "ser"),
        ("cnt", "cxt", "pop"),
        ("cnt", "cxt", "ser"),
        ("cnt", "cxt", "pop", "ser"),
    )
    return tuple(replace(base, enabled_components=frozenset(c)) for c in combos)


def run_matrix(
    gold: GoldSet,
    configs: Sequence[ScoreConfig],
    providers: Sequence[ProviderDescriptor],
    options: RuntimeOptions | None = None,
) -> EvalReport:
    """Run the pipeline for every (query, configuration) pair and assemble rows.

    Pipeline errors are annotated with the offending query id.
    """
    if not configs:
        raise ValueError("configs must be non-empty")
    rows = []
    for config in configs:
        runs: dict[str, RankedResults] = {}
        for gold_query in gold.queries:
            try:
                runs[gold_query.query_id] = run_search(
                    gold_query.query, config, providers, options
                )
            except Exception as exc:
                raise type(exc)(f"query {gold_query.query_id!r}: {exc}") from exc
        rows.append(evaluate(runs, gold, config_name(config)))
    return EvalReport(rows=tuple(rows), query_count=len(gold.queries))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render_report(report: EvalReport) -> str:
    """Canonical JSON rendering; :func:`parse_report` is its exact inverse."""
    return canonical_json(report.to_jsonable())


def parse_report(text: str) -> EvalReport:
    return EvalReport.from_jsonable(json.loads(text))


def _fmt_rank(value: float | None) -> str:
    return f"{value:.4f}" if value is not None else "-"


def render_table(report: EvalReport) -> str:
    """Human-readable fixed-width table of the report rows."""
    headers = ("Scores", "Soln@10", "R@10", "Soln@20", "R@20")
    body = [
        (
            row.config_name,
            str(row.soln_10),
            _fmt_rank(row.r_10),
            str(row.soln_20),
            _fmt_rank(row.r_20),
        )
        for row in report.rows
    ]
    widths = [
        max(len(headers[i]), *(len(line[i]) for line in body)) if body else len(headers[i])
        for i in range(len(headers))
    ]
    def fmt(cells: tuple[str, ...]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()

    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(line) for line in body)
    lines.append(f"({report.query_count} queries)")
    return "\n".join(lines)


def write_report_files(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json, report.csv and PNG figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    json_path = out / "report.json"
    json_path.write_text(render_report(report), encoding="utf-8")
    paths["json"] = json_path

    csv_path = out / "report.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_name", "soln_10", "r_10", "soln_20", "r_20"])
        for row in report.rows:
            writer.writerow(
                [
                    row.config_name,
                    row.soln_10,
                    "" if row.r_10 is None else row.r_10,
                    row.soln_20,
                    "" if row.r_20 is None else row.r_20,
                ]
            )
    paths["csv"] = csv_path

    paths.update(write_figures(report, out))
    return paths


def write_figures(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Render bar charts of solutions found and average ranks to PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = [row.config_name for row in report.rows]
    positions = range(len(labels))
    paths: dict[str, Path] = {}

    fig, ax = plt.subplots(figsize=(9, 4.5))
    width = 0.38
    ax.bar([p - width / 2 for p in positions], [r.soln_10 for r in report.rows],
           width=width, label="Soln@10")
    ax.bar([p + width / 2 for p in positions], [r.soln_20 for r in report.rows],
           width=width, label="Soln@20")
    ax.set_xticks(list(positions), labels, rotation=20, ha="right")
    ax.set_ylabel("queries with a solution found")
    ax.set_ylim(0, report.query_count)
    ax.legend()
    fig.tight_layout()
    solutions_path = out / "solutions_at_k.png"
    fig.savefig(solutions_path, dpi=120)
    plt.close(fig)
    paths["solutions_png"] = solutions_path

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.bar([p - width / 2 for p in positions],
           [r.r_10 if r.r_10 is not None else 0.0 for r in report.rows],
           width=width, label="R@10")
    ax.bar([p + width / 2 for p in positions],
           [r.r_20 if r.r_20 is not None else 0.0 for r in report.rows],
           width=width, label="R@20")
    ax.set_xticks(list(positions), labels, rotation=20, ha="right")
    ax.set_ylabel("average solution rank (lower is better)")
    ax.legend()
    fig.tight_layout()
    ranks_path = out / "average_ranks.png"
    fig.savefig(ranks_path, dpi=120)
    plt.close(fig)
    paths["ranks_png"] = ranks_path

    return paths
