"""Application configuration: providers, scoring defaults, runtime limits.

Configuration is a single declarative JSON file; secrets never live in it.
Live providers name the environment variable holding their API key
(``api_key_env``), and the value is read from the environment at request time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .providers import ProviderDescriptor, default_descriptors
from .scoring import ScoreConfig

__all__ = ["AppConfig", "default_app_config", "load_config"]

DEFAULT_LISTEN = "127.0.0.1:8080"


@dataclass(frozen=True, slots=True)
class AppConfig:
    """Everything the service and CLI need to run one deployment."""

    providers: tuple[ProviderDescriptor, ...]
    score: ScoreConfig = field(default_factory=ScoreConfig)
    fixture_path: str | None = None
    listen_address: str = DEFAULT_LISTEN
    per_provider_timeout: float = 5.0
    result_limit: int = 15
    retries: int = 1
    store_root: str | None = None
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "providers", tuple(self.providers))
        object.__setattr__(self, "cors_origins", tuple(self.cors_origins))
        if not self.providers:
            raise ValueError("at least one provider is required")
        ids = [p.id for p in self.providers]
        if len(set(ids)) != len(ids):
            raise ValueError("provider ids must be unique")
        if self.per_provider_timeout <= 0:
            raise ValueError("per_provider_timeout must be positive")
        if self.result_limit < 1:
            raise ValueError("result_limit must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "cors_origins": list(self.cors_origins),
            "fixture_path": self.fixture_path,
            "listen_address": self.listen_address,
            "per_provider_timeout": self.per_provider_timeout,
            "providers": [
                {
                    "api_key_env": p.api_key_env,
                    "id": p.id,
                    "kind": p.kind,
                    "weight": p.weight,
                }
                for p in self.providers
            ],
            "result_limit": self.result_limit,
            "retries": self.retries,
            "score": self.score.to_jsonable(),
            "store_root": self.store_root,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Any]) -> "AppConfig":
        providers = tuple(
            ProviderDescriptor(
                id=p["id"],
                weight=p["weight"],
                kind=p.get("kind", "fixture"),
                api_key_env=p.get("api_key_env"),
            )
            for p in data.get("providers", [])
        )
        kwargs: dict[str, Any] = {"providers": providers}
        if "score" in data:
            kwargs["score"] = ScoreConfig.from_jsonable(data["score"])
        for key in (
            "fixture_path", "listen_address", "per_provider_timeout",
            "result_limit", "retries", "store_root",
        ):
            if key in data and data[key] is not None:
                kwargs[key] = data[key]
        if data.get("cors_origins"):
            kwargs["cors_origins"] = tuple(data["cors_origins"])
        return cls(**kwargs)


def load_config(path: str | Path) -> AppConfig:
    """Read an AppConfig from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        return AppConfig.from_jsonable(json.load(fh))


def default_app_config(fixture_path: str | None = None) -> AppConfig:
    """Fixture-backed configuration with the shipped provider weights."""
    return AppConfig(providers=default_descriptors(), fixture_path=fixture_path)
