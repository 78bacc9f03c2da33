"""Service configuration: a flat key=value file with environment overrides.

Unknown keys are rejected so typos fail loudly. Every key can be overridden
by an environment variable named SARCH_<KEY uppercased>, which also makes a
config file optional.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .embedding import DEFAULT_DIM, ExternalServiceProvider, HashingProvider, Provider
from .errors import ConfigError

ENV_PREFIX = "SARCH_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    index_path: str = "sarch_index.bin"
    provider: str = "hash"
    provider_dim: int = DEFAULT_DIM
    provider_endpoint: str = ""
    stopwords_path: str = ""
    static_dir: str = ""
    default_k: int = 5
    cors_origins: str = "*"


_INT_KEYS = {"port", "provider_dim", "default_k"}
_KNOWN_KEYS = {f.name for f in fields(ServiceConfig)}


def _apply(config: ServiceConfig, key: str, value: str, origin: str) -> None:
    if key not in _KNOWN_KEYS:
        raise ConfigError(f"unknown config key '{key}' ({origin})")
    if key in _INT_KEYS:
        try:
            parsed: object = int(value)
        except ValueError:
            raise ConfigError(f"config key '{key}' needs an integer, got '{value}' ({origin})") from None
        if parsed < 1:
            raise ConfigError(f"config key '{key}' must be positive ({origin})")
    else:
        parsed = value
    setattr(config, key, parsed)


def parse_config_text(text: str, origin: str = "config") -> ServiceConfig:
    config = ServiceConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin} line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        _apply(config, key.strip(), value.strip(), f"{origin} line {lineno}")
    return config


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> ServiceConfig:
    """Defaults, then the file (if given), then SARCH_* environment variables."""
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"config file not found: {file_path}")
        config = parse_config_text(file_path.read_text("utf-8"), origin=str(file_path))
    else:
        config = ServiceConfig()
    env = os.environ if env is None else env
    for key in _KNOWN_KEYS:
        env_name = ENV_PREFIX + key.upper()
        if env_name in env:
            _apply(config, key, env[env_name], f"environment variable {env_name}")
    return config


def build_provider(config: ServiceConfig) -> Provider:
    if config.provider == "hash":
        return HashingProvider(dim=config.provider_dim)
    if config.provider == "external":
        if not config.provider_endpoint:
            raise ConfigError("provider=external needs provider_endpoint")
        return ExternalServiceProvider(endpoint=config.provider_endpoint)
    raise ConfigError(f"unknown provider '{config.provider}' (expected 'hash' or 'external')")
