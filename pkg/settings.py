"""
Numeric settings with file and environment overrides.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from errors import DomainError


ENV_PREFIX = "SUREMAP_"


@dataclass(frozen=True)
class Settings:
    sigma2_floor: Optional[float] = 1e-12  # None or 0 disables the floor
    fallback_sigma2: Optional[float] = None
    max_groups: int = 4096
    condition_threshold: float = 1e12
    truth_threshold: int = 40
    threads: int = 1

    def __post_init__(self) -> None:
        if self.sigma2_floor is not None and self.sigma2_floor < 0:
            raise DomainError("sigma2_floor must be nonnegative")
        if self.fallback_sigma2 is not None and self.fallback_sigma2 <= 0:
            raise DomainError("fallback_sigma2 must be positive")
        if self.max_groups < 1:
            raise DomainError("max_groups must be positive")
        if self.condition_threshold <= 1.0:
            raise DomainError("condition_threshold must exceed 1")
        if self.truth_threshold < 1:
            raise DomainError("truth_threshold must be positive")
        if self.threads < 1:
            raise DomainError("threads must be positive")


DEFAULT_SETTINGS = Settings()

_CASTS = {
    "sigma2_floor": float,
    "fallback_sigma2": float,
    "max_groups": int,
    "condition_threshold": float,
    "truth_threshold": int,
    "threads": int,
}


def _load_settings_file(path: Path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
        if path.suffix.lower() in {".yaml", ".yml"}:
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
        raise DomainError(f"Cannot load settings from {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise DomainError(f"Settings file {path} must hold a mapping at top level")
    return data


def _coerce(name: str, value: Any) -> Any:
    if value is None or (isinstance(value, str) and value.strip().lower() in {"", "none", "null"}):
        if name in ("sigma2_floor", "fallback_sigma2"):
            return None
        raise DomainError(f"Setting '{name}' cannot be empty")
    try:
        return _CASTS[name](value)
    except (TypeError, ValueError) as e:
        raise DomainError(f"Setting '{name}' has invalid value {value!r}") from e


def load_settings(path: Optional[str | Path] = None, environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Defaults, then the optional YAML/JSON file, then SUREMAP_* environment variables."""
    known = {f.name for f in fields(Settings)}
    overrides: Dict[str, Any] = {}
    if path is not None:
        for key, value in _load_settings_file(Path(path)).items():
            if key not in known:
                raise DomainError(f"Unknown setting '{key}' in {path}")
            overrides[key] = _coerce(key, value)
    env = os.environ if environ is None else environ
    for name in known:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            overrides[name] = _coerce(name, raw)
    return replace(DEFAULT_SETTINGS, **overrides)
