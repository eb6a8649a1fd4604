"""Application settings resolved from flags, environment, a JSON file and defaults.

Precedence, per field: command-line flag > ``LINKRAG_<FIELD>`` environment
variable > config file > built-in default.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .llm import PromptKind
from .retrieval import ASSEMBLY_MODES, RetrievalConfig

ENV_PREFIX = "LINKRAG_"
CONFIG_FILE_ENV = "LINKRAG_CONFIG_FILE"
EMBEDDERS = ("offline", "remote")
GENERATORS = ("mock", "remote")


@dataclass(frozen=True)
class AppConfig:
    corpus_root: str | None = None
    base_url_prefix: str | None = None
    index_path: str = "linkrag-index.jsonl"
    chunk_size: int = 1000
    overlap: int = 150
    k: int = 5
    n_links: int = 1
    depth: int = 1
    top_m: int = 1
    assembly_mode: str = "augment"
    embedder: str = "offline"
    embedding_endpoint: str | None = None
    embedding_model: str | None = None
    generator: str = "mock"
    generation_endpoint: str | None = None
    generation_model: str | None = None
    prompt_kind: str = "hyperlinked"

    def __post_init__(self):
        if self.chunk_size < 1 or not 0 <= self.overlap < self.chunk_size:
            raise ValueError("config: need chunk_size >= 1 and 0 <= overlap < chunk_size")
        if self.assembly_mode not in ASSEMBLY_MODES:
            raise ValueError(f"config: assembly_mode must be one of {ASSEMBLY_MODES}")
        if self.embedder not in EMBEDDERS:
            raise ValueError(f"config: embedder must be one of {EMBEDDERS}")
        if self.generator not in GENERATORS:
            raise ValueError(f"config: generator must be one of {GENERATORS}")
        if self.embedder == "remote" and not (self.embedding_endpoint and self.embedding_model):
            raise ValueError("config: remote embedder needs embedding_endpoint and embedding_model")
        if self.generator == "remote" and not (self.generation_endpoint and self.generation_model):
            raise ValueError("config: remote generator needs generation_endpoint and generation_model")
        PromptKind(self.prompt_kind)

    @property
    def retrieval(self) -> RetrievalConfig:
        return RetrievalConfig(k=self.k, n_links=self.n_links, depth=self.depth,
                               top_m=self.top_m, assembly_mode=self.assembly_mode)


FIELD_TYPES = {f.name: (int if f.type == "int" else str) for f in fields(AppConfig)}


def _coerce(name: str, value, source: str):
    kind = FIELD_TYPES[name]
    if value is None:
        return None
    if kind is int:
        if isinstance(value, bool):
            raise ValueError(f"{source}: {name} must be an integer")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ValueError(f"{source}: {name} must be an integer, got {value!r}") from None
    if not isinstance(value, str):
        raise ValueError(f"{source}: {name} must be a string, got {value!r}")
    return value


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(FIELD_TYPES))
    if unknown:
        raise ValueError(f"config file {path}: unknown fields {unknown}")
    return {name: _coerce(name, value, str(path)) for name, value in data.items()}


def resolve_config(flags: Mapping | None = None, env: Mapping[str, str] | None = None,
                   config_file=None) -> AppConfig:
    """Merge the four layers; ``None`` flag values count as unset."""
    flags = flags or {}
    env = os.environ if env is None else env
    if config_file is None:
        config_file = env.get(CONFIG_FILE_ENV) or None
    values = read_config_file(config_file) if config_file else {}
    for name in FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None and raw != "":
            values[name] = _coerce(name, raw, ENV_PREFIX + name.upper())
    for name, value in flags.items():
        if name in FIELD_TYPES and value is not None:
            values[name] = _coerce(name, value, f"--{name.replace('_', '-')}")
    return AppConfig(**values)
