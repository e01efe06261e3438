"""Experiment configuration: JSON files plus command-line overrides.

A config names a bundled scenario and may override its knobs.  The master
seed is mandatory (every random quantity derives from it); identical resolved
configs produce identical outputs.  Only the output directory may come from
the environment (LEVYCONV_OUT).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .scenarios import SCENARIOS

__all__ = ["ConfigError", "ResolvedConfig", "load_config", "resolve_config"]

_KNOWN_KEYS = {
    "scenario",
    "seed",
    "paths",
    "grid_cells",
    "grid_levels",
    "workers",
    "out",
    "p",
    "p_list",
    "n_iters",
    "count",
}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


@dataclass(frozen=True)
class ResolvedConfig:
    scenario: str
    kind: str
    seed: int
    paths: int
    grid_cells: int
    grid_levels: int
    workers: int
    out: Path
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """The exact resolved values, for provenance in the output directory."""
        d = {
            "scenario": self.scenario,
            "kind": self.kind,
            "seed": self.seed,
            "paths": self.paths,
            "grid_cells": self.grid_cells,
            "grid_levels": self.grid_levels,
            "workers": self.workers,
        }
        d.update(self.extra)
        return d


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}, col {exc.colno}): {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    return cfg


def _require_int(cfg: dict, key: str, minimum: int, default=None) -> int:
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"field '{key}' is required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"field '{key}' must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"field '{key}' must be >= {minimum}, got {value}")
    return value


def resolve_config(cfg: dict, overrides: dict | None = None) -> ResolvedConfig:
    """Merge config file values with command-line overrides and validate.

    Precedence: CLI flag > config file > scenario defaults.  The output
    directory may additionally fall back to LEVYCONV_OUT.
    """
    merged = dict(cfg)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    name = merged.get("scenario")
    if not isinstance(name, str) or name not in SCENARIOS:
        raise ConfigError(
            f"field 'scenario' must be one of {sorted(SCENARIOS)}, got {name!r}"
        )
    entry = SCENARIOS[name]
    defaults = entry["defaults"]

    seed = _require_int(merged, "seed", 0)
    paths = _require_int(merged, "paths", 1, defaults.get("paths", 100))
    grid_cells = _require_int(merged, "grid_cells", 1, defaults.get("grid_cells", 64))
    grid_levels = _require_int(merged, "grid_levels", 1, defaults.get("grid_levels", 3))
    workers = _require_int(merged, "workers", 1, 1)

    out = merged.get("out") or os.environ.get("LEVYCONV_OUT")
    if out is None:
        raise ConfigError("field 'out' is required (or set LEVYCONV_OUT)")

    extra = {}
    for key in ("p", "p_list", "n_iters", "count"):
        if key in merged:
            extra[key] = merged[key]
        elif key in defaults:
            extra[key] = defaults[key]
    return ResolvedConfig(
        scenario=name,
        kind=entry["kind"],
        seed=seed,
        paths=paths,
        grid_cells=grid_cells,
        grid_levels=grid_levels,
        workers=workers,
        out=Path(out),
        extra=extra,
    )
