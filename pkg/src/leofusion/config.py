"""Scenario configuration: defaults, flat ``key=value`` files and overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .metagraph import SCHEMES


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    # constellation and links
    num_orbits: int = 8
    sats_per_orbit: int = 16
    altitude_km: float = 500.0
    inclination_deg: float = 90.0
    sat_gflops: float = 100.0
    sgl_gbps: float = 0.2
    isl_gbps: float = 5.0
    uplink_gbps: float = 5.0
    channels_per_isl: int = 1
    # workload
    load: float = 200.0
    duration_s: float = 10.0
    subtasks_per_task: int = 2
    subtask_gflo: float = 100.0
    subtask_gb: float = 0.1
    threshold_s: float = 300.0
    # run
    scheme: str = "fusion"
    seed: int = 0
    result_volume_bits: float = 1e6
    literal_step16: bool = False
    # geometry gaps
    polar_mask_deg: float = 75.0
    elevation_min_deg: float = 5.0
    max_slant_range_km: float = 7800.0
    source_altitude_km: float = 600.0
    # connection index: uniform | hotspots | file:PATH
    eta: str = "hotspots"
    hotspot_k: int = 4
    hotspot_fraction: float = 0.8
    dest: str = "eta"

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_POSITIVE = ("num_orbits", "sats_per_orbit", "altitude_km", "sat_gflops", "sgl_gbps", "isl_gbps",
             "uplink_gbps", "duration_s", "subtasks_per_task", "subtask_gflo", "subtask_gb",
             "threshold_s", "result_volume_bits", "max_slant_range_km", "source_altitude_km",
             "hotspot_k")


def validate(cfg: ScenarioConfig) -> None:
    for name in _POSITIVE:
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name}: must be positive, got {getattr(cfg, name)!r}")
    if cfg.load < 0:
        raise ConfigError(f"load: must be non-negative, got {cfg.load!r}")
    if cfg.channels_per_isl != 1:
        raise ConfigError("channels_per_isl: only single-channel links are modelled")
    if cfg.inclination_deg != 90.0:
        raise ConfigError("inclination_deg: only polar (90 deg) Walker-star shells are modelled")
    if cfg.scheme not in SCHEMES:
        raise ConfigError(f"scheme: unknown scheme {cfg.scheme!r} (choose from {', '.join(SCHEMES)})")
    if not 0.0 <= cfg.polar_mask_deg <= 90.0:
        raise ConfigError("polar_mask_deg: must lie in [0, 90]")
    if not -90.0 < cfg.elevation_min_deg < 90.0:
        raise ConfigError("elevation_min_deg: must lie in (-90, 90)")
    if not 0.0 < cfg.hotspot_fraction < 1.0:
        raise ConfigError("hotspot_fraction: must lie in (0, 1)")
    if not (cfg.eta in ("uniform", "hotspots") or cfg.eta.startswith("file:")):
        raise ConfigError(f"eta: expected uniform, hotspots or file:PATH, got {cfg.eta!r}")
    if cfg.dest not in ("eta", "same_zone", "uniform"):
        raise ConfigError(f"dest: expected eta, same_zone or uniform, got {cfg.dest!r}")


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def coerce_value(key: str, raw):
    if key not in _FIELDS:
        raise ConfigError(f"{key}: unknown key")
    kind = type(getattr(ScenarioConfig(), key))
    if not isinstance(raw, str):
        raw_s = str(raw)
    else:
        raw_s = raw.strip()
    if kind is bool:
        low = raw_s.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw_s!r}")
    if kind is int:
        try:
            f = float(raw_s)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw_s!r}") from None
        if not f.is_integer():
            raise ConfigError(f"{key}: expected an integer, got {raw_s!r}")
        return int(f)
    if kind is float:
        try:
            return float(raw_s)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw_s!r}") from None
    return raw_s


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_config(path: str | Path | None = None, overrides: Mapping[str, object] | None = None
                 ) -> ScenarioConfig:
    """Defaults, then the file, then ``overrides`` (highest precedence)."""
    merged: dict[str, object] = {}
    if path is not None:
        merged.update(read_config_file(path))
    if overrides:
        merged.update(overrides)
    values = {k: coerce_value(k, v) for k, v in merged.items()}
    try:
        return ScenarioConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def dump_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.as_dict().items())
