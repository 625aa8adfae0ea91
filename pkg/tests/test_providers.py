"""Provider clients, corpus aggregation, and engine-weight calibration."""

import itertools
import random

import httpx
import pytest

from errsearch.extract import RawPage
from errsearch.model import ErrorQuery
from errsearch.providers import (
    DEFAULT_ENGINE_WEIGHTS,
    CalibrationSample,
    EmptyCalibration,
    FixtureSet,
    ProviderAuth,
    ProviderDescriptor,
    ProviderResult,
    ProviderTimeout,
    ProviderUnavailable,
    aggregate,
    calibrate_engine_weights,
    default_descriptors,
    fetch_results,
)


def make_fixture(rows_by_provider, pages=None):
    return FixtureSet(
        queries={"test query": {
            pid: [
                {"url": r[0], "title": r[1], "position": i + 1, **(r[2] if len(r) > 2 else {})}
                for i, r in enumerate(rows)
            ]
            for pid, rows in rows_by_provider.items()
        }},
        pages=pages or {},
    )


class TestFetchFixture:
    def test_truncation_keeps_positions(self):
        fixture = make_fixture({"google": [(f"https://x.com/{i}", f"t{i}") for i in range(15)]})
        rows = fetch_results(
            ProviderDescriptor(id="google", weight=0.41), "test query", 10,
            fixture_set=fixture,
        )
        assert len(rows) == 10
        assert [r.position for r in rows] == list(range(1, 11))

    def test_unknown_query_is_empty(self):
        fixture = make_fixture({"google": []})
        rows = fetch_results(
            ProviderDescriptor(id="google", weight=0.41), "another query", 5,
            fixture_set=fixture,
        )
        assert rows == ()

    def test_missing_fixture_set(self):
        with pytest.raises(ProviderUnavailable):
            fetch_results(ProviderDescriptor(id="google", weight=0.41), "q", 5)

    def test_votes_stripped_from_general_engines(self):
        fixture = make_fixture({"google": [("https://x.com/1", "t", {"so_votes": 9})]})
        rows = fetch_results(
            ProviderDescriptor(id="google", weight=0.41), "test query", 5,
            fixture_set=fixture,
        )
        assert rows[0].so_votes is None


class TestFetchLive:
    def descriptor(self):
        return ProviderDescriptor(id="stackoverflow", weight=1.0, kind="live")

    def test_missing_credentials(self, monkeypatch):
        monkeypatch.delenv("STACKEXCHANGE_API_KEY", raising=False)
        with pytest.raises(ProviderAuth):
            fetch_results(self.descriptor(), "q", 5)

    def test_parses_items(self, monkeypatch):
        monkeypatch.setenv("STACKEXCHANGE_API_KEY", "k")
        payload = {
            "items": [
                {"link": "https://stackoverflow.com/questions/1/a", "title": "A &amp; B", "score": 12},
                {"link": "https://stackoverflow.com/questions/2/b", "title": "C", "score": -1},
                {"title": "no link, skipped"},
            ]
        }
        transport = httpx.MockTransport(lambda request: httpx.Response(200, json=payload))
        rows = fetch_results(self.descriptor(), "q", 5, transport=transport)
        assert [r.position for r in rows] == [1, 2]
        assert rows[0].title == "A & B"
        assert rows[0].so_votes == 12
        assert rows[1].so_votes == -1

    def test_timeout_maps_to_provider_timeout(self, monkeypatch):
        monkeypatch.setenv("STACKEXCHANGE_API_KEY", "k")

        def raise_timeout(request):
            raise httpx.ConnectTimeout("slow")

        transport = httpx.MockTransport(raise_timeout)
        with pytest.raises(ProviderTimeout):
            fetch_results(self.descriptor(), "q", 5, transport=transport, retries=0)

    def test_retry_then_success(self, monkeypatch):
        monkeypatch.setenv("STACKEXCHANGE_API_KEY", "k")
        calls = itertools.count()

        def flaky(request):
            if next(calls) == 0:
                raise httpx.ConnectError("first attempt fails")
            return httpx.Response(200, json={"items": []})

        rows = fetch_results(
            self.descriptor(), "q", 5, transport=httpx.MockTransport(flaky), retries=1
        )
        assert rows == ()

    def test_auth_rejection(self, monkeypatch):
        monkeypatch.setenv("STACKEXCHANGE_API_KEY", "bad")
        transport = httpx.MockTransport(lambda request: httpx.Response(403))
        with pytest.raises(ProviderAuth):
            fetch_results(self.descriptor(), "q", 5, transport=transport)

    def test_no_live_client_for_general_engines(self, monkeypatch):
        with pytest.raises(ProviderUnavailable):
            fetch_results(
                ProviderDescriptor(id="google", weight=0.41, kind="live"), "q", 5
            )


class TestAggregate:
    QUERY = ErrorQuery(message="widget disposed")

    def test_merge_across_providers(self):
        corpus = aggregate(
            self.QUERY,
            {
                "google": [ProviderResult(url="https://x.com/a", title="G title", position=1)],
                "bing": [ProviderResult(url="http://x.com/a/", title="B title", position=3)],
            },
        )
        assert len(corpus.entries) == 1
        entry = corpus.entries[0]
        assert entry.canonical_url == "x.com/a"
        assert entry.per_provider_positions == {"google": 1, "bing": 3}
        assert entry.title == "G title"  # google outweighs bing
        assert entry.original_urls == {"https://x.com/a", "http://x.com/a/"}

    def test_canonicalization_merges_variants(self):
        corpus = aggregate(
            self.QUERY,
            {
                "google": [ProviderResult(url="http://x.com/a?utm_source=y", title="t", position=2)],
                "yahoo": [ProviderResult(url="x.com/a", title="t2", position=1)],
            },
        )
        assert len(corpus.entries) == 1

    def test_distinct_urls_stay_distinct(self):
        corpus = aggregate(
            self.QUERY,
            {"google": [
                ProviderResult(url=f"https://x.com/{i}", title=f"t{i}", position=i + 1)
                for i in range(3)
            ]},
        )
        assert len(corpus.entries) == 3
        assert [e.per_provider_positions["google"] for e in corpus.entries] == [1, 2, 3]

    def test_best_position_per_provider(self):
        corpus = aggregate(
            self.QUERY,
            {"google": [
                ProviderResult(url="https://x.com/a", title="t", position=4),
                ProviderResult(url="https://x.com/a#sec", title="t", position=2),
            ]},
        )
        assert corpus.entries[0].per_provider_positions == {"google": 2}

    def test_permutation_invariant(self):
        providers = {
            "google": [ProviderResult(url="https://x.com/a", title="ga", position=1),
                       ProviderResult(url="https://x.com/b", title="gb", position=2)],
            "bing": [ProviderResult(url="https://x.com/b", title="bb", position=1)],
            "stackoverflow": [ProviderResult(url="https://x.com/a", title="sa", position=1, so_votes=5)],
        }
        baseline = aggregate(self.QUERY, providers, built_at=0.0)
        for ordering in itertools.permutations(providers):
            shuffled = {pid: providers[pid] for pid in ordering}
            assert aggregate(self.QUERY, shuffled, built_at=0.0) == baseline

    def test_votes_and_content_from_pages(self):
        html = "<html><title>T</title><body><pre>java.lang.Err.X\n\tat a.b.C.d(C.java:1)</pre></body></html>"
        corpus = aggregate(
            self.QUERY,
            {"stackoverflow": [ProviderResult(
                url="https://stackoverflow.com/q/1", title="t", position=1, so_votes=7)]},
            raw_pages={"stackoverflow.com/q/1": RawPage(url="stackoverflow.com/q/1", html=html)},
        )
        entry = corpus.entries[0]
        assert entry.so_votes == 7
        assert len(entry.content.stack_traces) == 1

    def test_snippet_fallback_content(self):
        corpus = aggregate(
            self.QUERY,
            {"google": [ProviderResult(
                url="https://x.com/a", title="Title here",
                position=1, snippet="java.lang.Err.X\n\tat a.b.C.d(C.java:1)")]},
        )
        content = corpus.entries[0].content
        assert "Title here" in content.body_text
        assert len(content.stack_traces) == 1

    def test_entry_count_bounded_by_input(self):
        rng = random.Random(5)
        rows = {
            pid: [
                ProviderResult(url=f"https://x.com/{rng.randint(1, 6)}", title="t", position=i + 1)
                for i in range(8)
            ]
            for pid in ("google", "bing")
        }
        corpus = aggregate(self.QUERY, rows)
        total = sum(len(r) for r in rows.values())
        assert len(corpus.entries) <= total
        returned = {e.canonical_url for e in corpus.entries}
        for rows_list in rows.values():
            for row in rows_list:
                from errsearch.model import canonicalize_url
                assert canonicalize_url(row.url) in returned


class TestCalibration:
    def test_symmetric(self):
        samples = [
            CalibrationSample(provider_id=p, query_id="q1", result_ranks=(10, 20, 30))
            for p in ("google", "bing", "yahoo")
        ]
        weights = calibrate_engine_weights(samples)
        for p in ("google", "bing", "yahoo"):
            assert weights[p] == pytest.approx(1 / 3, abs=1e-9)
        assert weights["stackoverflow"] == 1.0

    def test_inverse_average_rank(self):
        samples = [
            CalibrationSample(provider_id="google", query_id="q", result_ranks=(100,)),
            CalibrationSample(provider_id="bing", query_id="q", result_ranks=(200,)),
            CalibrationSample(provider_id="yahoo", query_id="q", result_ranks=(400,)),
        ]
        weights = calibrate_engine_weights(samples)
        assert weights["google"] == pytest.approx(4 / 7, abs=1e-9)
        assert weights["bing"] == pytest.approx(2 / 7, abs=1e-9)
        assert weights["yahoo"] == pytest.approx(1 / 7, abs=1e-9)

    def test_general_weights_sum_to_one(self):
        rng = random.Random(6)
        for _ in range(25):
            samples = [
                CalibrationSample(
                    provider_id=p,
                    query_id=f"q{i}",
                    result_ranks=tuple(rng.randint(1, 10**6) for _ in range(rng.randint(1, 15))),
                )
                for p in ("google", "bing", "yahoo")
                for i in range(rng.randint(1, 4))
            ]
            weights = calibrate_engine_weights(samples)
            total = weights["google"] + weights["bing"] + weights["yahoo"]
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_strictly_monotone(self):
        samples = [
            CalibrationSample(provider_id="google", query_id="q", result_ranks=(50,)),
            CalibrationSample(provider_id="bing", query_id="q", result_ranks=(51,)),
            CalibrationSample(provider_id="yahoo", query_id="q", result_ranks=(52,)),
        ]
        weights = calibrate_engine_weights(samples)
        assert weights["google"] > weights["bing"] > weights["yahoo"]

    def test_missing_engine_raises(self):
        samples = [CalibrationSample(provider_id="google", query_id="q", result_ranks=(5,))]
        with pytest.raises(EmptyCalibration):
            calibrate_engine_weights(samples)

    def test_default_weights_shipped(self):
        assert DEFAULT_ENGINE_WEIGHTS == {
            "google": 0.41, "bing": 0.30, "yahoo": 0.29, "stackoverflow": 1.00,
        }
        descriptors = {d.id: d.weight for d in default_descriptors()}
        assert descriptors == DEFAULT_ENGINE_WEIGHTS
