"""Application configuration with flags > environment > config file
precedence. The config file is JSON with the keys of :class:`AppConfig`."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import DataError

ENV_PREFIX = "PREDGROUPS_"


@dataclass
class AppConfig:
    dataset: str | None = None
    cache_dir: str = ".predgroups-cache"
    model_dir: str = "models"
    vectorizer: str = "tfidf"  # "tfidf" | "embedding"
    embedding_file: str | None = None
    provider_endpoint: str | None = None
    provider_search_endpoint: str | None = None
    provider_rate_limit: float = 1.0
    server_host: str = "127.0.0.1"
    server_port: int = 8080
    workers: int = 1

    def validate(self) -> None:
        if self.vectorizer not in ("tfidf", "embedding"):
            raise DataError(f"unknown vectorizer '{self.vectorizer}'")
        if self.workers < 1:
            raise DataError("worker count must be at least 1")
        if self.dataset is not None and not Path(self.dataset).exists():
            raise DataError(f"dataset file not found: {self.dataset}")
        if self.embedding_file is not None and not Path(self.embedding_file).exists():
            raise DataError(f"embedding file not found: {self.embedding_file}")


_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}


def _coerce(name: str, value):
    if value is None:
        return None
    kind = _FIELD_TYPES[name]
    if "int" in str(kind):
        return int(value)
    if "float" in str(kind):
        return float(value)
    return value


def load_config(path=None, overrides: dict | None = None) -> AppConfig:
    """Assemble the configuration: defaults, then config file, then
    ``PREDGROUPS_*`` environment variables, then explicit overrides."""
    values: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise DataError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid config file {path}: {exc}")
        unknown = set(raw) - set(_FIELD_TYPES)
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    for name in _FIELD_TYPES:
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            values[name] = env
    for name, value in (overrides or {}).items():
        if value is not None:
            values[name] = value
    return AppConfig(**{k: _coerce(k, v) for k, v in values.items()})
