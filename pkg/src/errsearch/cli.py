"""Command-line front door: search, calibrate, eval, serve.

Exit codes: 0 on success, 2 on usage errors (click's convention), 1 on
runtime failures such as unreachable providers or unwritable output paths.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bundled import bundled_fixture_set, bundled_gold_set
from .config import AppConfig, default_app_config, load_config
from .evalharness import (
    GoldSet,
    default_matrix_configs,
    render_report,
    render_table,
    run_matrix,
    write_report_files,
)
from .extract import NotAStackTrace, parse_stack_trace
from .model import MAX_CONTEXT_LINES, ErrorQuery, canonical_json
from .pipeline import (
    InvalidQuery,
    NoProvidersAvailable,
    RankedResults,
    RuntimeOptions,
    run_search,
)
from .providers import (
    CalibrationSample,
    EmptyCalibration,
    FixtureSet,
    calibrate_engine_weights,
)
from .scoring import COMPONENTS, ScoreConfig

__all__ = ["main"]


def _load_app_config(config_path: str | None, fixtures: str | None) -> AppConfig:
    if config_path:
        app_config = load_config(config_path)
        if fixtures:
            from dataclasses import replace

            app_config = replace(app_config, fixture_path=fixtures)
        return app_config
    return default_app_config(fixture_path=fixtures)


def _runtime_options(app_config: AppConfig) -> RuntimeOptions:
    if app_config.fixture_path:
        fixture_set = FixtureSet.load(app_config.fixture_path)
    else:
        fixture_set = bundled_fixture_set()
    return RuntimeOptions(
        fixture_set=fixture_set,
        result_limit=app_config.result_limit,
        per_provider_timeout=app_config.per_provider_timeout,
        retries=app_config.retries,
        fetch_live_pages=any(p.kind == "live" for p in app_config.providers),
    )


def _parse_components(text: str) -> frozenset[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [n for n in names if n not in COMPONENTS]
    if unknown:
        raise click.UsageError(
            f"unknown score components: {', '.join(unknown)} (choose from {', '.join(COMPONENTS)})"
        )
    if not names:
        raise click.UsageError("at least one score component is required")
    return frozenset(names)


def _build_query(message: str, trace_file: str | None, context_file: str | None) -> ErrorQuery:
    if not message.strip():
        raise click.UsageError("--message must be non-empty")
    raw_trace = None
    parsed = None
    if trace_file:
        raw_trace = Path(trace_file).read_text(encoding="utf-8")
        try:
            parsed = parse_stack_trace(raw_trace)
        except NotAStackTrace:
            click.echo("warning: trace file did not parse; searching without it", err=True)
    context = None
    if context_file:
        lines = Path(context_file).read_text(encoding="utf-8").splitlines()
        if len(lines) > MAX_CONTEXT_LINES:
            click.echo(
                f"warning: context truncated to {MAX_CONTEXT_LINES} lines", err=True
            )
            lines = lines[:MAX_CONTEXT_LINES]
        context = "\n".join(lines) if lines else None
    return ErrorQuery(
        message=message, raw_stack_trace=raw_trace, parsed_trace=parsed, code_context=context
    )


def _results_table(results: RankedResults) -> str:
    lines = [
        f"{'#':>3}  {'final':>7}  {'cnt':>5}  {'cxt':>5}  {'pop':>5}  {'ser':>5}  title / url"
    ]
    for item in results.items:
        s = item.scores
        title = item.entry.title or "(untitled)"
        if len(title) > 60:
            title = title[:57] + "..."
        lines.append(
            f"{item.rank:>3}  {s.s_final:>7.4f}  {s.s_cnt:>5.3f}  {s.s_cxt:>5.3f}"
            f"  {s.s_pop:>5.3f}  {s.s_ser:>5.3f}  {title}"
        )
        lines.append(f"{'':>3}  {'':>7}  {'':>5}  {'':>5}  {'':>5}  {'':>5}  {item.entry.canonical_url}")
    if not results.items:
        lines.append("(no results)")
    return "\n".join(lines)


@click.group()
@click.version_option(package_name="errsearch")
def main() -> None:
    """Context-aware meta-search for programming errors and exceptions."""


@main.command()
@click.option("--message", required=True, help="Error or exception message to search for.")
@click.option("--trace", "trace_file", type=click.Path(exists=True, dir_okay=False),
              help="File holding the raw stack trace.")
@click.option("--context", "context_file", type=click.Path(exists=True, dir_okay=False),
              help="File holding the surrounding source lines (at most 7).")
@click.option("--scores", default="cnt,cxt,ser", show_default=True,
              help="Comma-separated score components to fuse.")
@click.option("--top", "top_n", default=10, show_default=True, type=int,
              help="How many results to print.")
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False),
              help="Provider fixture file (defaults to the bundled fixtures).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="AppConfig JSON file.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table",
              show_default=True)
def search(message: str, trace_file: str | None, context_file: str | None, scores: str,
           top_n: int, fixtures: str | None, config_path: str | None, fmt: str) -> None:
    """Run one search and print the ranked results with score breakdowns."""
    from dataclasses import replace

    query = _build_query(message, trace_file, context_file)
    app_config = _load_app_config(config_path, fixtures)
    score_config = replace(app_config.score, enabled_components=_parse_components(scores))
    try:
        results = run_search(
            query, score_config, app_config.providers, _runtime_options(app_config)
        )
    except InvalidQuery as exc:
        raise click.UsageError(str(exc))
    except NoProvidersAvailable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    shown = results.top(top_n)
    if fmt == "json":
        click.echo(canonical_json(shown.to_jsonable()))
    else:
        click.echo(_results_table(shown))


@main.command()
@click.option("--samples", "samples_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of calibration samples.")
@click.option("--general", default="google,bing,yahoo", show_default=True,
              help="Comma-separated general engine ids.")
@click.option("--qa", default="stackoverflow", show_default=True,
              help="Comma-separated Q&A engine ids (fixed weight 1.0).")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table",
              show_default=True)
def calibrate(samples_file: str, general: str, qa: str, fmt: str) -> None:
    """Derive engine weights from sampled traffic ranks."""
    try:
        rows = json.loads(Path(samples_file).read_text(encoding="utf-8"))
        samples = [
            CalibrationSample(
                provider_id=row["provider_id"],
                query_id=row["query_id"],
                result_ranks=tuple(row["result_ranks"]),
            )
            for row in rows
        ]
    except (ValueError, KeyError, TypeError) as exc:
        raise click.UsageError(f"invalid samples file: {exc}")

    general_ids = {part.strip() for part in general.split(",") if part.strip()}
    qa_ids = {part.strip() for part in qa.split(",") if part.strip()}
    try:
        weights = calibrate_engine_weights(samples, general_ids, qa_ids)
    except EmptyCalibration as exc:
        raise click.UsageError(str(exc))

    if fmt == "json":
        click.echo(canonical_json(dict(sorted(weights.items()))))
    else:
        for provider_id in sorted(weights):
            click.echo(f"{provider_id:<16} {weights[provider_id]:.3f}")


@main.command(name="eval")
@click.option("--gold", "gold_file", type=click.Path(exists=True, dir_okay=False),
              help="Gold set JSON (defaults to the bundled gold set).")
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False),
              help="Provider fixture file (defaults to the bundled fixtures).")
@click.option("--configs", "configs_spec", default="default", show_default=True,
              help='"default" for the shipped combination ladder, or a JSON file '
                   "holding a list of score configurations.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table",
              show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Directory for report.json, report.csv and PNG figures.")
def eval_command(gold_file: str | None, fixtures: str | None, configs_spec: str,
                 fmt: str, out_dir: str | None) -> None:
    """Evaluate score combinations over a labeled query set."""
    gold = GoldSet.load(gold_file) if gold_file else bundled_gold_set()
    app_config = default_app_config(fixture_path=fixtures)

    if configs_spec == "default":
        configs = default_matrix_configs(app_config.score)
    else:
        try:
            raw = json.loads(Path(configs_spec).read_text(encoding="utf-8"))
            configs = tuple(ScoreConfig.from_jsonable(c) for c in raw)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise click.UsageError(f"invalid configs: {exc}")

    try:
        report = run_matrix(gold, configs, app_config.providers, _runtime_options(app_config))
    except NoProvidersAvailable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    if fmt == "json":
        click.echo(render_report(report))
    else:
        click.echo(render_table(report))
    if out_dir:
        paths = write_report_files(report, out_dir)
        for kind in sorted(paths):
            click.echo(f"wrote {paths[kind]}", err=True)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="AppConfig JSON file (defaults to fixture-backed configuration).")
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", default=None, type=int, help="Override the configured listen port.")
def serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Start the HTTP API."""
    import uvicorn

    from .service import create_app

    from dataclasses import replace

    app_config = _load_app_config(config_path, None)
    if app_config.fixture_path is None:
        # Hosting without fixtures only makes sense with live providers.
        if all(p.kind == "fixture" for p in app_config.providers):
            from importlib import resources

            bundled = resources.files("errsearch").joinpath("fixtures/providers.json")
            app_config = replace(app_config, fixture_path=str(bundled))
    if app_config.store_root is None:
        # Persist runs so GET /api/v1/runs/<id> works out of the box.
        app_config = replace(app_config, store_root="./data")
    app = create_app(app_config)
    uvicorn.run(app, host=host or app_config.host, port=port or app_config.port)
