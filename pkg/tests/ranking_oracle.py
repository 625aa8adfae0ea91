"""Independent end-to-end ranking oracle for the bundled fixtures.

Recomputes the whole chain from the raw fixture JSON: its own result merging,
its own HTML block extraction (regex, not the library's parser), its own
min-max / composition / fusion arithmetic, numpy PageRank, and its own
sorting.  It reuses only the leaf primitives that have their own independent
oracles elsewhere in the suite (tokenize / simhash / hamming / canonicalize).
The scoring, providers and pipeline modules are deliberately not imported.
"""

from __future__ import annotations

import html as html_lib
import re

import numpy as np

from errsearch.model import canonicalize_url
from errsearch.textsim import hamming, simhash, tokenize

WEIGHTS = {"google": 0.41, "bing": 0.30, "yahoo": 0.29, "stackoverflow": 1.00}
PROVIDER_ORDER = sorted(WEIGHTS)

_PRE_RE = re.compile(r"<pre>(?:<code>)?(.*?)(?:</code>)?</pre>", re.DOTALL)
_HREF_RE = re.compile(r'href="([^"]+)"')
_HEADER_RE = re.compile(
    r"^[A-Za-z_$][A-Za-z0-9_$]*(\.[A-Za-z_$][A-Za-z0-9_$]*)+(:.*)?$"
)
_LINENO_RE = re.compile(r":\d+\)")


def _pre_blocks(page_html: str) -> list[str]:
    return [html_lib.unescape(m.group(1)) for m in _PRE_RE.finditer(page_html)]


def _is_trace_block(block: str) -> bool:
    lines = [line.strip() for line in block.splitlines() if line.strip()]
    if not lines or not _HEADER_RE.match(lines[0]):
        return False
    return any(line.startswith("at ") for line in lines[1:])


def _strip_line_numbers(text: str) -> str:
    return _LINENO_RE.sub(")", text)


def _page_outlinks(page_html: str, self_url: str) -> set[str]:
    links = set()
    for href in _HREF_RE.finditer(page_html):
        try:
            link = canonicalize_url(href.group(1))
        except Exception:
            continue
        if link != self_url:
            links.add(link)
    return links


def _numpy_pagerank(urls: list[str], outlinks: dict[str, set[str]],
                    damping: float = 0.85, tolerance: float = 1e-8) -> dict[str, float]:
    n = len(urls)
    index = {u: i for i, u in enumerate(urls)}
    matrix = np.zeros((n, n))
    dangling = np.zeros(n, dtype=bool)
    for u in urls:
        targets = [index[t] for t in outlinks[u] if t in index]
        if not targets:
            dangling[index[u]] = True
        else:
            for t in targets:
                matrix[index[u], t] = 1.0 / len(targets)
    x = np.full(n, 1.0 / n)
    for _ in range(100):
        fresh = (1.0 - damping) / n + damping * (x @ matrix + x[dangling].sum() / n)
        delta = np.abs(fresh - x).sum()
        x = fresh
        if delta < tolerance:
            break
    return {u: float(x[index[u]]) for u in urls}


def _minmax_high_good(values: dict[str, float]) -> dict[str, float]:
    if not values:
        return {}
    low, high = min(values.values()), max(values.values())
    if high == low:
        return {u: 1.0 for u in values}
    return {u: (v - low) / (high - low) for u, v in values.items()}


def _minmax_low_good(values: dict[str, float]) -> dict[str, float]:
    if not values:
        return {}
    low, high = min(values.values()), max(values.values())
    if high == low:
        return {u: 1.0 for u in values}
    return {u: 1.0 - (v - low) / (high - low) for u, v in values.items()}


def oracle_ranking(fixture: dict, gold_query: dict, enabled: tuple[str, ...]) -> list[str]:
    """Ranked canonical URLs for one gold query under one component set."""
    message = gold_query["query"]["message"]
    raw_trace = gold_query["query"]["raw_stack_trace"]
    context = gold_query["query"]["code_context"]
    recorded = fixture["queries"][message]
    pages = fixture["pages"]

    # -- merge by canonical URL -------------------------------------------
    positions: dict[str, dict[str, int]] = {}
    rows: dict[str, list[tuple[str, int, dict]]] = {}
    for provider in PROVIDER_ORDER:
        for row in recorded.get(provider, []):
            canon = canonicalize_url(row["url"])
            positions.setdefault(canon, {})
            best = positions[canon].get(provider)
            if best is None or row["position"] < best:
                positions[canon][provider] = row["position"]
            rows.setdefault(canon, []).append((provider, row["position"], row))

    urls = sorted(positions)

    def best_row(url: str, want=None):
        candidates = [
            (provider, pos, row) for provider, pos, row in rows[url]
            if want is None or row.get(want) is not None
        ]
        if not candidates:
            return None
        candidates.sort(key=lambda c: (-WEIGHTS[c[0]], c[0], c[1]))
        return candidates[0][2]

    titles = {u: best_row(u)["title"] for u in urls}
    votes = {
        u: so_row["so_votes"]
        for u in urls
        for so_row in [
            next(
                (row for provider, _, row in sorted(rows[u], key=lambda c: c[1])
                 if provider == "stackoverflow" and row.get("so_votes") is not None),
                None,
            )
        ]
        if so_row is not None
    }
    ranks = {
        u: best_row(u, want="traffic_rank")["traffic_rank"]
        for u in urls
        if best_row(u, want="traffic_rank") is not None
    }

    # -- per-page blocks ----------------------------------------------------
    blocks = {u: _pre_blocks(pages[u]) if u in pages else [] for u in urls}
    trace_blocks = {u: [b for b in blocks[u] if _is_trace_block(b)] for u in urls}
    outlinks = {u: (_page_outlinks(pages[u], u) if u in pages else set()) for u in urls}

    # -- base metrics ---------------------------------------------------------
    message_bag = tokenize(message)
    s_sew = {u: min(1.0, sum(WEIGHTS[p] for p in positions[u])) for u in urls}
    s_cnt = {u: _cos(message_bag, tokenize(titles[u])) for u in urls}

    s_st = {u: 0.0 for u in urls}
    if raw_trace:
        query_fp = simhash(tokenize(_strip_line_numbers(raw_trace)))
        distances = {
            u: min(
                hamming(simhash(tokenize(_strip_line_numbers(block))), query_fp)
                for block in trace_blocks[u]
            )
            for u in urls if trace_blocks[u]
        }
        s_st.update(_minmax_low_good(distances))

    s_cc = {u: 0.0 for u in urls}
    if context:
        context_fp = simhash(tokenize(context))
        distances = {
            u: min(hamming(simhash(tokenize(block)), context_fp) for block in blocks[u])
            for u in urls if blocks[u]
        }
        s_cc.update(_minmax_low_good(distances))

    s_so = {u: 0.0 for u in urls}
    s_so.update(_minmax_high_good({u: float(v) for u, v in votes.items()}))

    s_str = {u: 0.0 for u in urls}
    s_str.update(_minmax_low_good({u: float(r) for u, r in ranks.items()}))

    s_tt = {}
    for u in urls:
        top = [p for p in positions[u].values() if p <= 10]
        s_tt[u] = 1.0 - (sum(top) / len(top) - 1.0) / 10.0 if top else 0.0

    s_pr = _minmax_high_good(_numpy_pagerank(urls, outlinks))

    # -- composition and fusion ----------------------------------------------
    finals = {}
    tie = {}
    for u in urls:
        pop = (s_so[u] + s_str[u] + s_pr[u]) / 3.0
        cxt = (s_st[u] + s_cc[u]) / 2.0
        ser = s_sew[u] * s_tt[u]
        component = {"cnt": s_cnt[u], "cxt": cxt, "pop": pop, "ser": ser}
        finals[u] = sum(component[c] for c in sorted(enabled))
        tie[u] = (ser, s_cnt[u])

    return sorted(urls, key=lambda u: (-finals[u], -tie[u][0], -tie[u][1], u))


def _cos(a, b) -> float:
    if not a or not b:
        return 0.0
    dot = sum(c * b.counts.get(t, 0) for t, c in a.counts.items())
    if dot == 0:
        return 0.0
    na = sum(c * c for c in a.counts.values())
    nb = sum(c * c for c in b.counts.values())
    return min(1.0, dot / (na * nb) ** 0.5)


def oracle_soln_at_k(fixture: dict, gold: dict, enabled: tuple[str, ...], k: int) -> int:
    """Number of gold queries whose solution ranks within the top k."""
    found = 0
    for gold_query in gold["queries"]:
        ranking = oracle_ranking(fixture, gold_query, enabled)
        solutions = set(gold_query["solution_urls"])
        rank = next((i + 1 for i, u in enumerate(ranking) if u in solutions), None)
        if rank is not None and rank <= k:
            found += 1
    return found
