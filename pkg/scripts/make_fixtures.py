#!/usr/bin/env python3
"""Regenerate the bundled provider fixtures and gold set.

Builds 25 synthetic error queries, each with a small corpus of result pages
(one planted solution page plus decoys), records per-provider result lists,
and renders inline HTML for every page.  Output is fully deterministic
(seeded RNG, no timestamps), so the files can be committed and diffed.

Usage: python3 scripts/make_fixtures.py [output-dir]
"""

from __future__ import annotations

import html
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from errsearch.extract import parse_stack_trace
from errsearch.model import canonicalize_url

SEED = 20240811

# (exception type, message, context classes) per query
ERRORS = [
    ("java.lang.NullPointerException", "Cannot invoke method on null object reference", "OrderService"),
    ("org.eclipse.swt.SWTException", "Widget is disposed", "TableViewerPart"),
    ("java.lang.ClassNotFoundException", "com.mysql.jdbc.Driver", "ConnectionFactory"),
    ("java.util.ConcurrentModificationException", "Collection modified during iteration", "ListenerRegistry"),
    ("java.lang.OutOfMemoryError", "Java heap space", "ImageCache"),
    ("java.lang.ArrayIndexOutOfBoundsException", "Index 5 out of bounds for length 5", "CsvRowReader"),
    ("java.io.FileNotFoundException", "config.properties (No such file or directory)", "SettingsLoader"),
    ("java.sql.SQLException", "No suitable driver found for jdbc:mysql://localhost", "JdbcTemplateBuilder"),
    ("java.lang.IllegalStateException", "Workbench has not been created yet", "ViewActivator"),
    ("java.lang.UnsupportedClassVersionError", "Unsupported major.minor version 51.0", "PluginLoader"),
    ("org.eclipse.core.runtime.CoreException", "Plug-in could not be initialized", "BundleStarter"),
    ("java.net.SocketTimeoutException", "Read timed out", "RestGateway"),
    ("java.lang.NoClassDefFoundError", "Could not initialize class org.apache.log4j.Logger", "LogBootstrap"),
    ("java.lang.IllegalArgumentException", "Timeout value cannot be negative", "RetryPolicy"),
    ("java.io.IOException", "Stream closed", "ReportExporter"),
    ("javax.naming.NameNotFoundException", "Name jdbc is not bound in this Context", "DataSourceLookup"),
    ("java.lang.StackOverflowError", "Recursion depth exceeded in equals", "TreeNodeMatcher"),
    ("java.lang.NumberFormatException", "For input string \"abc\"", "PortParser"),
    ("org.hibernate.LazyInitializationException", "could not initialize proxy - no Session", "InvoiceRepository"),
    ("java.lang.ClassCastException", "java.lang.Integer cannot be cast to java.lang.String", "PreferenceStoreAdapter"),
    ("java.net.BindException", "Address already in use", "EmbeddedHttpServer"),
    ("org.osgi.framework.BundleException", "Could not resolve module", "FeatureInstaller"),
    ("java.util.MissingResourceException", "Can't find bundle for base name messages", "LocaleMessages"),
    ("java.lang.InterruptedException", "sleep interrupted", "PollingWorker"),
    ("javax.servlet.ServletException", "Servlet initialization failed", "UploadServlet"),
]

FORUM_HOSTS = [
    "coderanch.com/t", "forum.devtalk.org/thread", "bugs.eclipse.org/show_bug.cgi",
    "javaworkshop.net/posts", "github.com/example/issues", "dzone.com/articles",
    "baeldung-notes.com/java", "devnotes.io/entry",
]
FLOOD_HOSTS = [
    "quickfixhub.com/q", "errorcentral.net/e", "codesnippets.guru/s", "fixitfaq.com/a",
    "stacktips.org/t", "bugdigest.io/b", "javahelpdesk.net/h", "crashnotes.dev/c",
    "debugdiary.com/d", "failfixes.org/f", "patchpost.net/p", "oopsranch.com/o",
]

PROSE = [
    "I am seeing this in the error log every time the view refreshes.",
    "This started after upgrading the target platform.",
    "The accepted answer below resolved it for our team.",
    "Check whether the listener is unregistered before the widget goes away.",
    "You need to guard the call with an isDisposed check or defer to the UI thread.",
    "The root cause is usually a stale reference kept across a restart.",
    "See the documentation for the lifecycle of these objects.",
    "A minimal reproducible example is attached.",
]


def slugify(text: str) -> str:
    out = []
    for ch in text.lower():
        if ch.isalnum():
            out.append(ch)
        elif out and out[-1] != "-":
            out.append("-")
    return "".join(out).strip("-")[:48]


def make_trace(exc_type: str, message: str, ctx_class: str, rng: random.Random,
               caused_by: bool) -> str:
    pkg = "com.acme." + ctx_class.lower()
    lines = [f"{exc_type}: {message}"]
    methods = ["refresh", "apply", "run", "execute", "update", "handle"]
    for k in range(rng.randint(3, 5)):
        method = methods[(k + rng.randint(0, 2)) % len(methods)]
        lines.append(
            f"\tat {pkg}.{ctx_class}.{method}({ctx_class}.java:{rng.randint(20, 400)})"
        )
    lines.append("\tat org.eclipse.core.runtime.SafeRunner.run(SafeRunner.java:42)")
    if caused_by:
        lines.append(f"Caused by: java.lang.reflect.InvocationTargetException")
        lines.append(
            f"\tat {pkg}.internal.Delegate.invoke(Delegate.java:{rng.randint(20, 200)})"
        )
    return "\n".join(lines)


def shift_line_numbers(trace: str, rng: random.Random) -> str:
    import re

    def bump(match: "re.Match[str]") -> str:
        return f":{int(match.group(1)) + rng.randint(1, 30)})"

    return re.sub(r":(\d+)\)", bump, trace)


def make_context(ctx_class: str, message: str) -> str:
    field = ctx_class[0].lower() + ctx_class[1:]
    return "\n".join(
        [
            f"public void refresh{ctx_class}() {{",
            f"    // {message}",
            f"    if ({field} == null) {{",
            f"        {field} = create{ctx_class}();",
            "    }",
            f"    {field}.update(selection, true);",
            "}",
        ]
    )


def page_html(title: str, prose: list[str], trace: str | None, code: str | None,
              links: list[str], extra_code: str | None = None) -> str:
    parts = [
        "<!DOCTYPE html>",
        "<html><head><title>" + html.escape(title) + "</title>",
        "<style>body{font-family:sans-serif}</style>",
        "<script>var tracked = 1;</script>",
        "</head><body>",
        f"<h1>{html.escape(title)}</h1>",
    ]
    for i, paragraph in enumerate(prose):
        parts.append(f"<p>{html.escape(paragraph)}</p>")
        if i == 0 and trace is not None:
            parts.append("<pre>" + html.escape(trace) + "</pre>")
    if code is not None:
        parts.append("<pre><code>" + html.escape(code) + "</code></pre>")
    if extra_code is not None:
        parts.append("<pre><code>" + html.escape(extra_code) + "</code></pre>")
    for href in links:
        parts.append(f'<a href="{html.escape(href)}">related discussion</a>')
    parts.append("</body></html>")
    return "\n".join(parts)


def build() -> tuple[dict, dict]:
    rng = random.Random(SEED)
    queries_fixture: dict[str, dict[str, list[dict]]] = {}
    pages: dict[str, str] = {}
    gold_queries: list[dict] = []

    so_id = 7_001_000
    traffic_pool = iter(range(1, 10**9))

    for index, (exc_type, message, ctx_class) in enumerate(ERRORS, start=1):
        qid = f"q{index:02d}"
        short_type = exc_type.rsplit(".", 1)[-1]
        query_message = f"{short_type}: {message}"

        if index % 5 == 0:
            archetype = "message_only"
        elif index % 3 == 0:
            archetype = "title_flood"
        elif index in (7, 14):
            archetype = "mirror"
        else:
            archetype = "clean"

        query_trace = None if archetype == "message_only" else make_trace(
            exc_type, message, ctx_class, rng, caused_by=index % 4 == 0
        )
        query_context = None if archetype == "message_only" else make_context(ctx_class, message)

        # --- corpus pages -------------------------------------------------
        so_id += rng.randint(200, 900)
        solution_url = f"https://stackoverflow.com/questions/{so_id}/{slugify(message)}"
        solution_canonical = canonicalize_url(solution_url)
        solution_title = f"How to fix {short_type} ({message.split('(')[0].strip()}) in Eclipse"
        solution_votes = rng.randint(25, 60)
        solution_trace = None
        if query_trace is not None:
            solution_trace = shift_line_numbers(query_trace, rng)
            if rng.random() < 0.5:
                solution_trace += f"\n\tat com.acme.app.Main.main(Main.java:{rng.randint(5, 60)})"

        entries: list[dict] = []  # local descriptors, not ResultEntry
        entries.append(
            {
                "url": solution_url,
                "canonical": solution_canonical,
                "title": solution_title,
                "so_votes": solution_votes,
                "traffic_rank": 40 + index,
                "trace": solution_trace,
                "code": query_context,
                "snippet": f"Accepted answer explaining {short_type} and how to avoid it.",
                "role": "solution",
            }
        )

        # StackOverflow decoys: related questions with different traces.
        n_so_decoys = rng.randint(2, 3)
        for d in range(n_so_decoys):
            other = ERRORS[(index + 3 + d) % len(ERRORS)]
            so_id += rng.randint(50, 300)
            url = f"https://stackoverflow.com/questions/{so_id}/{slugify(other[1])}"
            entries.append(
                {
                    "url": url,
                    "canonical": canonicalize_url(url),
                    "title": f"{other[0].rsplit('.', 1)[-1]}: {other[1]}",
                    "so_votes": rng.choice([-3, 0, 2, 5, 9, 14]),
                    "traffic_rank": 40 + index,
                    "trace": make_trace(other[0], other[1], other[2], rng, caused_by=False),
                    "code": None,
                    "snippet": f"Question about {other[0].rsplit('.', 1)[-1]}.",
                    "role": "so_decoy",
                }
            )

        # Forum / blog decoys.  The first two repeat the query message verbatim
        # in their titles, so the keyword-only ranking places them above the
        # paraphrased solution title.
        n_forum = rng.randint(3, 4)
        for d in range(n_forum):
            host = FORUM_HOSTS[(index + d) % len(FORUM_HOSTS)]
            url = f"https://{host}/{slugify(message)}-{index}{d}"
            has_code = d == 0
            exact_title = d < 2 and archetype != "message_only"
            entries.append(
                {
                    "url": url,
                    "canonical": canonicalize_url(url),
                    "title": query_message if exact_title
                    else f"Discussion: {message} in plug-in development",
                    "so_votes": None,
                    "traffic_rank": rng.choice([900, 4500, 52000, 310000, None]),
                    "trace": None,
                    "code": f"// unrelated helper\nint total = items.size();\nreturn total > 0;" if has_code else None,
                    "snippet": rng.choice(PROSE),
                    "role": "forum",
                }
            )

        # Title-flood decoys: titles lexically identical to the query message.
        if archetype == "title_flood":
            for d in range(11):
                host = FLOOD_HOSTS[d % len(FLOOD_HOSTS)]
                url = f"https://{host}/{slugify(query_message)}-{index}-{d}"
                entries.append(
                    {
                        "url": url,
                        "canonical": canonicalize_url(url),
                        "title": query_message if d % 2 == 0 else f"{query_message} {short_type}",
                        "so_votes": None,
                        "traffic_rank": rng.choice([150000, 600000, 2500000, None]),
                        "trace": None,
                        "code": None,
                        "snippet": "Keyword page repeating the error message.",
                        "role": "flood",
                    }
                )

        # Mirror page: full copy of the solution content under another host.
        if archetype == "mirror":
            url = f"https://stackmirror.live/{slugify(query_message)}-{index}"
            entries.append(
                {
                    "url": url,
                    "canonical": canonicalize_url(url),
                    "title": query_message,
                    "so_votes": None,
                    "traffic_rank": 780000,
                    "trace": solution_trace,
                    "code": query_context,
                    "snippet": "Mirrored copy of the accepted solution.",
                    "role": "mirror",
                }
            )

        by_canonical = {e["canonical"]: e for e in entries}
        assert len(by_canonical) == len(entries), f"duplicate canonical URL in {qid}"

        # --- link graph and page HTML --------------------------------------
        forum_entries = [e for e in entries if e["role"] == "forum"]
        for d, entry in enumerate(forum_entries):
            entry["links"] = [entries[0]["url"]]  # forums link the accepted answer
            if d + 1 < len(forum_entries):
                entry["links"].append(forum_entries[d + 1]["url"])
        entries[0]["links"] = [forum_entries[0]["url"]] if forum_entries else []
        entries[0]["links"].append(entries[0]["url"])  # self-link: must be dropped
        entries[0]["links"].append("https://docs.example.org/reference")

        for entry in entries:
            prose = [PROSE[(index + len(entry["title"])) % len(PROSE)],
                     PROSE[(index * 3 + len(entry["canonical"])) % len(PROSE)]]
            pages[entry["canonical"]] = page_html(
                title=entry["title"],
                prose=prose,
                trace=entry["trace"],
                code=entry["code"],
                links=entry.get("links", []),
                extra_code="List<String> names = new ArrayList<>();" if entry["role"] == "solution" else None,
            )

        # --- provider recordings -------------------------------------------
        def variant(url: str, style: int) -> str:
            if style == 0:
                return url
            if style == 1:
                return url.replace("https://", "http://") + "/"
            if style == 2:
                return url + "?utm_source=fixture&utm_medium=test"
            return url + "#answer"

        so_entries = [e for e in entries if e["so_votes"] is not None]
        flood_entries = [e for e in entries if e["role"] == "flood"]
        mirror_entries = [e for e in entries if e["role"] == "mirror"]

        providers: dict[str, list[dict]] = {}

        so_order = [entries[0]] + [e for e in so_entries if e is not entries[0]]
        providers["stackoverflow"] = [
            {
                "url": variant(e["url"], k % 4 if e is not entries[0] else 0),
                "title": e["title"],
                "position": k + 1,
                "snippet": e["snippet"],
                "so_votes": e["so_votes"],
                "traffic_rank": e["traffic_rank"],
            }
            for k, e in enumerate(so_order)
        ]

        general_pool = [e for e in entries if e["role"] in ("so_decoy", "forum")]
        for engine, sol_pos, flood_share in (
            ("google", rng.randint(1, 2), 4),
            ("bing", rng.randint(2, 4), 4),
            ("yahoo", rng.randint(3, 6), 3),
        ):
            pool = list(general_pool)
            rng.shuffle(pool)
            listing: list[dict] = []
            taken = pool[: rng.randint(4, len(pool))]
            listing.extend(taken)
            if mirror_entries:
                listing.insert(min(1, len(listing)), mirror_entries[0])
            flood_slice = flood_entries[:flood_share] if engine == "google" else (
                flood_entries[flood_share:2 * flood_share] if engine == "bing"
                else flood_entries[2 * flood_share:]
            )
            listing.extend(flood_slice)
            listing.insert(min(sol_pos - 1, len(listing)), entries[0])
            rows = []
            for k, e in enumerate(listing):
                rows.append(
                    {
                        "url": variant(e["url"], (k + index) % 4),
                        "title": e["title"],
                        "position": k + 1,
                        "snippet": e["snippet"],
                        "traffic_rank": e["traffic_rank"],
                    }
                )
            providers[engine] = rows

        queries_fixture[query_message] = providers

        # --- gold entry -----------------------------------------------------
        parsed = parse_stack_trace(query_trace).to_jsonable() if query_trace else None
        gold_queries.append(
            {
                "query_id": qid,
                "query": {
                    "code_context": query_context,
                    "message": query_message,
                    "parsed_trace": parsed,
                    "raw_stack_trace": query_trace,
                },
                "solution_urls": [solution_canonical],
            }
        )

    fixture = {"pages": pages, "queries": queries_fixture}
    gold = {"queries": gold_queries}
    return fixture, gold


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "errsearch" / "fixtures"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    fixture, gold = build()
    (out_dir / "providers.json").write_text(
        json.dumps(fixture, sort_keys=True, indent=1, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (out_dir / "goldset.json").write_text(
        json.dumps(gold, sort_keys=True, indent=1, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    n_pages = len(fixture["pages"])
    print(f"wrote {len(fixture['queries'])} queries, {n_pages} pages to {out_dir}")


if __name__ == "__main__":
    main()
