"""Service configuration: paths, provider, engine knobs.

Loaded from a JSON file or built programmatically; every configured path must
exist at startup or loading fails with a ConfigError naming the offender.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .agents import ProviderConfig, default_rag_store, load_rag_store, make_client
from .annealer import AnnealConfig
from .catalog import load_catalog
from .scoring import EnergyParams
from .session import EngineConfig, SessionEngine, SessionStore


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8008
    data_dir: str = "./sessions"
    catalog_path: str | None = None  # None: packaged catalog
    rag_path: str | None = None  # None: packaged design rules
    allow_extensions: bool = False
    provider: ProviderConfig = ProviderConfig()
    auto_threshold: int = 75
    max_grade_rounds: int = 3
    rag_k: int = 3
    expert_edit: bool = False
    px_per_m: float = 50.0
    anneal_seed: int = 0
    api_token: str | None = None

    def validate(self) -> None:
        for label, path in (
            ("catalog_path", self.catalog_path),
            ("rag_path", self.rag_path),
            ("provider.fixtures_path", self.provider.fixtures_path),
        ):
            if path is not None and not Path(path).exists():
                raise ConfigError(f"{label} does not exist: {path}")
        if self.provider.kind not in ("mock", "live"):
            raise ConfigError(f"provider.kind must be mock or live, got {self.provider.kind!r}")
        if self.provider.kind == "mock" and not self.provider.fixtures_path:
            raise ConfigError("mock provider needs provider.fixtures_path")
        if not 0 <= self.auto_threshold <= 100:
            raise ConfigError("auto_threshold must be in [0, 100]")


def load_config(path: str | Path) -> ServiceConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file does not exist: {p}")
    try:
        doc = json.loads(p.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}") from e
    provider = ProviderConfig(**doc.pop("provider", {}))
    try:
        config = ServiceConfig(provider=provider, **doc)
    except TypeError as e:
        raise ConfigError(f"unknown config field: {e}") from e
    config.validate()
    return config


def build_engine(config: ServiceConfig, clock=None) -> SessionEngine:
    config.validate()
    catalog = load_catalog(config.catalog_path, allow_extensions=config.allow_extensions)
    rag = load_rag_store(config.rag_path) if config.rag_path else default_rag_store()
    client = make_client(config.provider)
    engine_config = EngineConfig(
        auto_threshold=config.auto_threshold,
        max_grade_rounds=config.max_grade_rounds,
        rag_k=config.rag_k,
        expert_edit=config.expert_edit,
        anneal=AnnealConfig(seed=config.anneal_seed),
        energy=EnergyParams(),
        px_per_m=config.px_per_m,
    )
    store = SessionStore(config.data_dir)
    kwargs = {} if clock is None else {"clock": clock}
    return SessionEngine(store, catalog, client, rag, engine_config, **kwargs)
