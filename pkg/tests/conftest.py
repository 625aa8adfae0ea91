import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from errsearch.bundled import bundled_fixture_set, bundled_gold_set


@pytest.fixture(scope="session")
def fixture_set():
    return bundled_fixture_set()


@pytest.fixture(scope="session")
def gold_set():
    return bundled_gold_set()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    seen: dict[str, str] = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            status = "PASS" if outcome == "passed" else "FAIL"
            if seen.get(name) != "FAIL":
                seen[name] = status
    if seen:
        terminalreporter.section("acceptance criteria")
        for name in sorted(seen):
            terminalreporter.write_line(f"{seen[name]}  {name}")
