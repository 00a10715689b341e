"""Zone connection indices, Poisson task arrivals and task instantiation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .orbital import ZoneGrid, ZoneId

ZoneIndexMap = dict[ZoneId, float]
RateMap = dict[ZoneId, float]


class TrafficError(ValueError):
    pass


@dataclass(frozen=True)
class Subtask:
    flop_g: float
    volume_gb: float

    def __post_init__(self):
        if self.flop_g <= 0 or self.volume_gb <= 0:
            raise TrafficError("subtask demands must be positive")

    @property
    def volume_bits(self) -> float:
        return self.volume_gb * 8e9


@dataclass(frozen=True)
class Task:
    id: int
    source_zone: ZoneId
    dest_zone: ZoneId
    num_subtasks: int
    gen_time_s: float
    threshold_s: float
    subtasks: tuple[Subtask, ...]

    def __post_init__(self):
        if self.num_subtasks < 1:
            raise TrafficError("a task needs at least one subtask")
        if self.threshold_s <= 0:
            raise TrafficError("threshold must be positive")
        if len(self.subtasks) != self.num_subtasks:
            raise TrafficError("subtask list does not match num_subtasks")


@dataclass(frozen=True)
class TaskTemplate:
    """Homogeneous per-run task shape (defaults: reference scenario)."""

    num_subtasks: int = 2
    flop_g: float = 100.0
    volume_gb: float = 0.1
    threshold_s: float = 300.0


def load_connection_index(path: str | Path, grid: ZoneGrid = ZoneGrid()) -> ZoneIndexMap:
    """Read a ``row,col,eta`` CSV holding one line per zone."""
    eta: ZoneIndexMap = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["row", "col", "eta"]:
            raise TrafficError(f"{path}: expected header 'row,col,eta'")
        for lineno, rec in enumerate(reader, start=2):
            try:
                zone = ZoneId(int(rec["row"]), int(rec["col"]))
                value = float(rec["eta"])
            except (TypeError, ValueError) as exc:
                raise TrafficError(f"{path}:{lineno}: malformed row") from exc
            if not (0 <= zone.row < grid.rows and 0 <= zone.col < grid.cols):
                raise TrafficError(f"{path}:{lineno}: zone {tuple(zone)} outside the grid")
            if zone in eta:
                raise TrafficError(f"{path}:{lineno}: duplicate zone {tuple(zone)}")
            if not np.isfinite(value) or value < 0:
                raise TrafficError(f"{path}:{lineno}: eta must be a non-negative number, got {value}")
            eta[zone] = value
    missing = [z for z in grid.zones() if z not in eta]
    if missing:
        raise TrafficError(f"{path}: missing zone {tuple(missing[0])} ({len(missing)} missing)")
    if sum(eta.values()) <= 0:
        raise TrafficError(f"{path}: connection indices sum to zero")
    return eta


def write_connection_index(eta: Mapping[ZoneId, float], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "eta"])
        for z in sorted(eta):
            w.writerow([z.row, z.col, repr(float(eta[z]))])


def synth_connection_index(kind: str = "uniform", *, k: int = 4, fraction: float = 0.8,
                           seed: int = 0, grid: ZoneGrid = ZoneGrid()) -> ZoneIndexMap:
    """Synthetic stand-in for measured connection data.

    ``hotspots`` puts ``fraction`` of the total mass on ``k`` random zones
    (equal shares) and spreads the rest evenly over the others.
    """
    zones = grid.zones()
    if kind == "uniform":
        return {z: 1.0 for z in zones}
    if kind != "hotspots":
        raise TrafficError(f"unknown connection index kind {kind!r}")
    if not 0.0 < fraction < 1.0:
        raise TrafficError("hotspot fraction must lie in (0, 1)")
    if not 1 <= k < len(zones):
        raise TrafficError(f"hotspot count must lie in [1, {len(zones) - 1}]")
    rng = np.random.default_rng(seed)
    hot = set(rng.choice(len(zones), size=k, replace=False).tolist())
    rest = (1.0 - fraction) / (len(zones) - k)
    return {z: (fraction / k if i in hot else rest) for i, z in enumerate(zones)}


def hotspots(eta: Mapping[ZoneId, float], k: int = 4) -> list[ZoneId]:
    """The ``k`` zones with the largest index, heaviest first."""
    return sorted(eta, key=lambda z: (-eta[z], z))[:k]


def arrival_rates(load: float, eta: Mapping[ZoneId, float]) -> RateMap:
    if load < 0:
        raise TrafficError("load must be non-negative")
    total = float(sum(eta.values()))
    if total <= 0:
        raise TrafficError("connection indices sum to zero")
    return {z: load * v / total for z, v in eta.items()}


DestSampler = Callable[[ZoneId, np.random.Generator], ZoneId]


def eta_dest_sampler(eta: Mapping[ZoneId, float]) -> DestSampler:
    """Destination drawn from the connection-index distribution, never the source."""
    zones = sorted(eta)
    weights = np.array([eta[z] for z in zones], dtype=float)
    pos = {z: i for i, z in enumerate(zones)}

    def sample(source: ZoneId, rng: np.random.Generator) -> ZoneId:
        w = weights.copy()
        w[pos[source]] = 0.0
        if w.sum() <= 0:
            w = np.ones_like(w)
            w[pos[source]] = 0.0
        return zones[int(rng.choice(len(zones), p=w / w.sum()))]

    return sample


def same_zone_sampler(source: ZoneId, rng: np.random.Generator) -> ZoneId:
    return source


def uniform_dest_sampler(grid: ZoneGrid = ZoneGrid()) -> DestSampler:
    zones = grid.zones()

    def sample(source: ZoneId, rng: np.random.Generator) -> ZoneId:
        i = int(rng.integers(len(zones) - 1))
        others = [z for z in zones if z != source]
        return others[i]

    return sample


def _arrival_times(rate: float, duration_s: float, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return np.empty(0)
    out = []
    t = 0.0
    # draw in chunks sized to the expected count
    chunk = max(16, int(rate * duration_s * 1.2) + 16)
    while True:
        gaps = rng.exponential(1.0 / rate, size=chunk)
        times = t + np.cumsum(gaps)
        keep = times[times < duration_s]
        out.append(keep)
        if len(keep) < chunk:
            break
        t = float(times[-1])
    return np.concatenate(out)


def generate_tasks(rates: Mapping[ZoneId, float], duration_s: float, seed: int,
                   template: TaskTemplate = TaskTemplate(),
                   dest_sampler: DestSampler | None = None) -> list[Task]:
    """Merged per-zone Poisson arrivals over ``[0, duration_s)``.

    Each zone draws from its own child stream of ``seed``; destinations come
    from one more child stream after the arrivals are sorted, so the result
    depends only on the seed and the inputs.
    """
    if duration_s <= 0:
        raise TrafficError("duration must be positive")
    zones = sorted(rates)
    children = np.random.SeedSequence(seed).spawn(len(zones) + 1)
    events: list[tuple[float, ZoneId]] = []
    for zone, child in zip(zones, children[:-1]):
        for t in _arrival_times(rates[zone], duration_s, np.random.default_rng(child)):
            events.append((float(t), zone))
    events.sort()
    if dest_sampler is None:
        dest_sampler = uniform_dest_sampler()
    dest_rng = np.random.default_rng(children[-1])
    sub = tuple(Subtask(template.flop_g, template.volume_gb) for _ in range(template.num_subtasks))
    return [Task(id=i, source_zone=zone, dest_zone=dest_sampler(zone, dest_rng),
                 num_subtasks=template.num_subtasks, gen_time_s=t,
                 threshold_s=template.threshold_s, subtasks=sub)
            for i, (t, zone) in enumerate(events)]
