"""Accessors for the fixture data shipped inside the package."""

from __future__ import annotations

import json
from importlib import resources

from .evalharness import GoldSet
from .providers import FixtureSet

__all__ = ["bundled_fixture_set", "bundled_gold_set"]


def _read(name: str) -> str:
    return resources.files("errsearch").joinpath(f"fixtures/{name}").read_text("utf-8")


def bundled_fixture_set() -> FixtureSet:
    """The shipped 25-query provider recording with inline result pages."""
    return FixtureSet.from_jsonable(json.loads(_read("providers.json")))


def bundled_gold_set() -> GoldSet:
    """The shipped gold set matching the bundled provider fixtures."""
    return GoldSet.from_jsonable(json.loads(_read("goldset.json")))
