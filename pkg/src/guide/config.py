"""One TOML configuration file shared by tracker, meter, selector and simulator.

Resolution order, highest first: explicit overrides (CLI flags), environment
variables named ``GUIDE_<SECTION>_<KEY>`` (e.g. ``GUIDE_TRACKER_ENERGY_TARGET_J``),
the config file, built-in defaults.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .meter import SimMeterConfig
from .selector import SelectorConfig
from .tracker import TrackerConfig

ENV_PREFIX = "GUIDE_"

DEFAULTS: dict[str, dict[str, Any]] = {
    "tracker": {
        "energy_target_j": 150.0,
        "slot_duration_s": 2.0,
        "poll_interval_s": 0.1,
        "ema_weight": 0.3,
        "ema_persists_across_slots": False,
    },
    "meter": {
        "base_draw_w": 45.0,
        "base_draw_jitter_w": 0.0,
        "seed": 0,
        "jitter_step_s": 0.1,
        "tracker_overhead_w": 0.0,
    },
    "selector": {
        "retry_interval_s": 0.5,
        "max_retries": 20,
    },
    "simulation": {
        "seed": 0,
        "requests": 100,
        "mean_interarrival_s": 5.0,
        "task_mix": "icapt",
        "sample_accuracy": False,
        "registry": "",
        "name_only_distribution": "",
        "trace": "",
    },
}


@dataclass(frozen=True)
class ResolvedConfig:
    tracker: TrackerConfig
    meter: SimMeterConfig
    selector: SelectorConfig
    simulation: dict[str, Any]

    def echo(self) -> dict[str, dict[str, Any]]:
        from dataclasses import asdict

        return {
            "tracker": asdict(self.tracker),
            "meter": asdict(self.meter),
            "selector": asdict(self.selector),
            "simulation": dict(self.simulation),
        }


def _coerce(section: str, key: str, value: Any, source: str) -> Any:
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.strip().lower() in ("1", "true", "yes", "on"):
                return True
            if isinstance(value, str) and value.strip().lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if isinstance(default, int):
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"{source}: {section}.{key} expects {type(default).__name__}, got {value!r}"
        ) from None


def load_config_file(path: str | Path) -> dict[str, dict[str, Any]]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    for section, values in data.items():
        if section not in DEFAULTS:
            raise ConfigError(f"config file {path}: unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"config file {path}: [{section}] must be a table")
        for key in values:
            if key not in DEFAULTS[section]:
                raise ConfigError(f"config file {path}: unknown key {section}.{key}")
    return data


def _from_env(env: Mapping[str, str]) -> dict[str, dict[str, str]]:
    out: dict[str, dict[str, str]] = {}
    for section, keys in DEFAULTS.items():
        for key in keys:
            name = f"{ENV_PREFIX}{section.upper()}_{key.upper()}"
            if name in env:
                out.setdefault(section, {})[key] = env[name]
    return out


def resolve_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
) -> ResolvedConfig:
    """Merge defaults, file, environment and overrides, then validate every section."""
    merged = {s: dict(v) for s, v in DEFAULTS.items()}
    layers = [
        (load_config_file(path) if path else {}, f"config file {path}"),
        (_from_env(os.environ if env is None else env), "environment"),
        (overrides or {}, "command line"),
    ]
    for layer, source in layers:
        for section, values in layer.items():
            if section not in DEFAULTS:
                raise ConfigError(f"{source}: unknown section '{section}'")
            for key, value in values.items():
                if key not in DEFAULTS[section]:
                    raise ConfigError(f"{source}: unknown key {section}.{key}")
                if value is None:
                    continue
                merged[section][key] = _coerce(section, key, value, source)

    sim = merged["simulation"]
    if sim["requests"] <= 0:
        raise ConfigError("simulation.requests must be positive")
    if sim["mean_interarrival_s"] <= 0:
        raise ConfigError("simulation.mean_interarrival_s must be positive")
    return ResolvedConfig(
        tracker=TrackerConfig(**merged["tracker"]),
        meter=SimMeterConfig(**merged["meter"]),
        selector=SelectorConfig(**merged["selector"]),
        simulation=sim,
    )
