"""Named parameter presets and flat JSON run configs with preset inheritance."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import DeviceParams
from .errors import ConfigError

PRESET_ENV = "DUALRAIL_PRESET_DIR"
PRESET_NAMES = ("table1", "table2", "fig2", "fig5")
OPTION_DEFAULTS = {"p_leak": 0.01, "conversion_efficiency": 0.99, "seed": 0, "budget": "idle"}
META_KEYS = ("preset", "description")
MAX_DEPTH = 8


@dataclass(frozen=True)
class RunConfig:
    params: DeviceParams
    options: dict = field(default_factory=dict)
    preset: str | None = None

    def option(self, key: str):
        return self.options.get(key, OPTION_DEFAULTS[key])


def preset_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(PRESET_ENV)
    if env:
        dirs.append(Path(env))
    dirs.append(Path(__file__).parent / "presets")
    return dirs


def find_preset(name: str) -> Path:
    for d in preset_dirs():
        p = d / f"{name}.json"
        if p.is_file():
            return p
    raise ConfigError(f"unknown preset {name!r} (searched {', '.join(str(d) for d in preset_dirs())})")


def _read_json(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def flatten(data: dict, depth: int = 0) -> dict:
    """Resolve the ``preset`` chain; later keys override inherited ones."""
    if depth > MAX_DEPTH:
        raise ConfigError("preset inheritance is too deep (cycle?)")
    allowed = set(DeviceParams.field_names()) | set(OPTION_DEFAULTS) | set(META_KEYS)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    out = {}
    parent = data.get("preset")
    if parent is not None:
        out.update(flatten(_read_json(find_preset(parent)), depth + 1))
    out.update({k: v for k, v in data.items() if k not in META_KEYS})
    return out


def resolve(data: dict) -> RunConfig:
    flat = flatten(data)
    names = DeviceParams.field_names()
    missing = [k for k in names if k not in flat]
    if missing:
        raise ConfigError(f"missing parameter(s): {', '.join(missing)}")
    for k in names:
        if not isinstance(flat[k], (int, float)) or isinstance(flat[k], bool):
            raise ConfigError(f"parameter {k} must be a number, got {flat[k]!r}")
    params = DeviceParams.from_dict({k: flat[k] for k in names})
    options = {k: flat[k] for k in OPTION_DEFAULTS if k in flat}
    return RunConfig(params, options, data.get("preset"))


def load_preset(name: str) -> RunConfig:
    return resolve({"preset": name})


def load_config(path) -> RunConfig:
    return resolve(_read_json(Path(path)))
