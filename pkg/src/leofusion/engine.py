"""Per-subtask shortest-path offloading and the sequential simulation loop."""
from __future__ import annotations

import enum
import heapq
import logging
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import traffic
from .config import ScenarioConfig
from .metagraph import (CompiledMetagraph, EdgeKind, Endpoint, MetagraphCompiler,
                        MetagraphError, MetaNode, Tier, WeightedMetagraph)
from .orbital import (ConstellationSpec, Snapshot, ZoneGrid, ZoneId, all_vn_links,
                      build_snapshot, to_ecef, visible_nodes)
from .resources import Reservation, ResourceLedger
from .traffic import Task

log = logging.getLogger(__name__)


class Classification(str, enum.Enum):
    GROUND = "Ground"
    VISIBLE = "VisibleSatellite"
    INVISIBLE = "InvisibleSatellite"


# ---------------------------------------------------------------------------
# shortest path
# ---------------------------------------------------------------------------

def _chain(pred: list, node: int) -> list[int]:
    out = []
    while node != -1:
        out.append(node)
        node = pred[node]
    out.reverse()
    return out


def dijkstra(adjacency: Sequence[Sequence[tuple[int, int]]], weights: Sequence[float],
             source: int, target: int) -> tuple[list[int], float] | None:
    """Label-setting search over integer nodes.

    ``adjacency[x]`` lists ``(y, edge_index)``. Among equal-length paths the
    lexicographically smallest node sequence wins (exact for positive
    weights). Returns ``None`` when ``target`` is unreachable.
    """
    if source == target:
        return [], 0.0
    n = len(adjacency)
    dist = [None] * n
    pred = [-1] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        if x == target:
            break
        for y, e in adjacency[x]:
            if done[y]:
                continue
            nd = d + weights[e]
            old = dist[y]
            if old is None or nd < old:
                dist[y] = nd
                pred[y] = x
                heapq.heappush(heap, (nd, y))
            elif nd == old and pred[y] != x and _chain(pred, x) + [y] < _chain(pred, pred[y]) + [y]:
                pred[y] = x
    if dist[target] is None:
        return None
    return _chain(pred, target), dist[target]


def _as_edge_weights(wg) -> Mapping:
    return wg.weights if isinstance(wg, WeightedMetagraph) else wg


def shortest_path(wg: WeightedMetagraph | Mapping[tuple[Hashable, Hashable], float],
                  source: Hashable, target: Hashable) -> tuple[list, float] | None:
    """Minimum-weight directed path ``source -> target``.

    ``wg`` is a weighted metagraph or a plain ``{(a, b): weight}`` mapping.
    Nodes must be mutually orderable; ties go to the lexicographically
    smallest node sequence. Returns ``None`` if no path exists.
    """
    weights = _as_edge_weights(wg)
    nodes = set()
    for a, b in weights:
        nodes.add(a)
        nodes.add(b)
    if isinstance(wg, WeightedMetagraph):
        nodes.update(wg.graph.nodes)
    nodes.update((source, target))
    order = sorted(nodes)
    pos = {v: i for i, v in enumerate(order)}
    adj: list[list[tuple[int, int]]] = [[] for _ in order]
    wlist = []
    for (a, b), w in weights.items():
        adj[pos[a]].append((pos[b], len(wlist)))
        wlist.append(float(w))
    found = dijkstra(adj, wlist, pos[source], pos[target])
    if found is None:
        return None
    path, length = found
    return [order[i] for i in path], length


def path_length(weights: Mapping, path: Sequence) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += weights[(a, b)]
    return total


def classify_path(path: Sequence[MetaNode], u_visible) -> Classification:
    zone = compute_zone(path)
    if zone is None:
        return Classification.GROUND
    return Classification.VISIBLE if zone in u_visible else Classification.INVISIBLE


def compute_zone(path: Sequence[MetaNode]) -> ZoneId | None:
    """Zone of the virtual edge on ``path``, or ``None`` for ground computing."""
    for a, b in zip(path, path[1:]):
        if a.tier is Tier.UNCOMPUTED and b.tier is Tier.COMPUTED:
            return a.zone
    return None


# ---------------------------------------------------------------------------
# offloading
# ---------------------------------------------------------------------------

@dataclass
class DelayComponents:
    sgl_transmission: float = 0.0
    isl_transmission: float = 0.0
    propagation: float = 0.0
    computation: float = 0.0
    waiting: float = 0.0

    @property
    def transmission(self) -> float:
        return self.sgl_transmission + self.isl_transmission

    @property
    def total(self) -> float:
        return (self.sgl_transmission + self.isl_transmission + self.propagation
                + self.computation + self.waiting)

    def as_dict(self) -> dict[str, float]:
        return {"sgl_transmission": self.sgl_transmission,
                "isl_transmission": self.isl_transmission,
                "propagation": self.propagation, "computation": self.computation,
                "waiting": self.waiting}


@dataclass
class OffloadDecision:
    task_id: int
    subtask: int
    path: list[MetaNode]
    length_s: float
    classification: Classification
    compute_zone: ZoneId | None
    reservations: list[Reservation] = field(default_factory=list)
    completion_s: float = float("nan")
    components: DelayComponents = field(default_factory=DelayComponents)

    @property
    def delay_s(self) -> float:
        return self.components.total


@dataclass
class TaskRecord:
    task: Task
    scheme: str
    success: bool
    delay_s: float
    decisions: list[OffloadDecision]
    failure: str = ""

    @property
    def critical(self) -> OffloadDecision | None:
        """Subtask that finishes last and so sets the task delay."""
        if not self.decisions:
            return None
        return max(self.decisions, key=lambda d: (d.completion_s, -d.subtask))


@dataclass
class SimulationResult:
    records: list[TaskRecord]
    config: dict
    seed: int
    hotspots: list[ZoneId] = field(default_factory=list)

    @property
    def num_tasks(self) -> int:
        return len(self.records)


class Scenario:
    """Geometry, ledger and metagraph cache shared by one simulation run."""

    def __init__(self, cfg: ScenarioConfig, ledger: ResourceLedger | None = None):
        self.cfg = cfg
        self.spec = ConstellationSpec(
            num_orbits=cfg.num_orbits, sats_per_orbit=cfg.sats_per_orbit,
            altitude_m=cfg.altitude_km * 1e3, inclination_deg=cfg.inclination_deg,
            polar_mask_deg=cfg.polar_mask_deg, elevation_min_deg=cfg.elevation_min_deg,
            max_slant_range_m=cfg.max_slant_range_km * 1e3,
            source_altitude_m=cfg.source_altitude_km * 1e3)
        self.grid = ZoneGrid()
        intra, inter = all_vn_links(self.spec, self.grid)
        self.ledger = ledger or ResourceLedger(
            self.grid.zones(), intra | inter, sat_gflops=cfg.sat_gflops, isl_gbps=cfg.isl_gbps,
            sgl_gbps=cfg.sgl_gbps, uplink_gbps=cfg.uplink_gbps)
        self.compiler = MetagraphCompiler(self.ledger, cfg.literal_step16)

    def snapshot(self, t: float) -> Snapshot:
        return build_snapshot(self.spec, self.grid, t)

    def endpoints(self, task: Task) -> tuple[Endpoint, Endpoint]:
        src = Endpoint(task.source_zone,
                       self.grid.center(task.source_zone, self.spec.source_altitude_m))
        dst = Endpoint(task.dest_zone, self.grid.center(task.dest_zone, 0.0))
        return src, dst

    def compiled(self, scheme: str, snap: Snapshot, src: Endpoint, dst: Endpoint
                 ) -> CompiledMetagraph:
        u_vis = visible_nodes(src.point, snap, self.spec)
        v_vis = visible_nodes(dst.point, snap, self.spec)
        return self.compiler.compile(scheme, snap, u_vis, v_vis, src, dst)

    def distances(self, c: CompiledMetagraph, snap: Snapshot, src: Endpoint, dst: Endpoint
                  ) -> np.ndarray:
        pts = np.vstack([snap.sat_ecef, _ecef(src, snap), _ecef(dst, snap)])
        return np.linalg.norm(pts[c.pt_a] - pts[c.pt_b], axis=1)


def _ecef(e: Endpoint, snap: Snapshot) -> np.ndarray:
    return to_ecef(e.point, snap.earth_radius_m)


def _realize(c: CompiledMetagraph, ledger: ResourceLedger, path: list[int], t: float,
             durations: np.ndarray, distances: np.ndarray, light_speed: float,
             owner) -> tuple[float, DelayComponents, list[Reservation]]:
    """Walk the chosen path in time, reserving each hop as the data reaches it."""
    comp = DelayComponents()
    reservations: list[Reservation] = []
    ready = t
    for a, b in zip(path, path[1:]):
        i = c.edge_index(a, b)
        key = c.keys[i]
        dur = float(durations[i])
        sched = ledger.schedule_at(int(c.res_idx[i]))
        start = sched.earliest_start(dur, ready)
        res = Reservation(key, start, start + dur, owner)
        ledger.commit(res)
        reservations.append(res)
        comp.waiting += start - ready
        kind = c.kinds[i]
        prop = float(distances[i]) / light_speed if kind is not EdgeKind.VIRTUAL else 0.0
        if kind is EdgeKind.VIRTUAL:
            comp.computation += dur
        elif kind is EdgeKind.DOWNLINK:
            comp.sgl_transmission += dur
        else:
            comp.isl_transmission += dur
        comp.propagation += prop
        ready = start + dur + prop
    return ready, comp, reservations


def offload_task(task: Task, scheme: str, scenario: Scenario,
                 result_volume_bits: float | None = None) -> TaskRecord:
    """Route every subtask of ``task`` in order; all-or-nothing on failure."""
    cfg = scenario.cfg
    ledger = scenario.ledger
    rv = cfg.result_volume_bits if result_volume_bits is None else result_volume_bits
    light = scenario.spec.light_speed_m_s
    t = task.gen_time_s
    snap = scenario.snapshot(t)
    src, dst = scenario.endpoints(task)
    try:
        c = scenario.compiled(scheme, snap, src, dst)
    except MetagraphError as exc:
        return TaskRecord(task, scheme, False, task.threshold_s, [], str(exc))
    dists = scenario.distances(c, snap, src, dst)
    decisions: list[OffloadDecision] = []

    def fail(reason: str) -> TaskRecord:
        for d in decisions:
            for r in d.reservations:
                ledger.release(r)
        return TaskRecord(task, scheme, False, task.threshold_s, [], reason)

    for k, sub in enumerate(task.subtasks):
        weights = c.weights(sub, t, rv, light, dists)
        found = dijkstra(c.adjacency, weights.tolist(), c.source, c.target)
        if found is None:
            return fail("no path")
        ipath, length = found
        if length > task.threshold_s:
            return fail("over threshold")
        path = [c.nodes[i] for i in ipath]
        durations = c.durations(sub, rv)
        completion, comp, res = _realize(c, ledger, ipath, t, durations, dists, light,
                                         (task.id, k))
        decision = OffloadDecision(task.id, k, path, length,
                                   classify_path(path, c.u_visible), compute_zone(path),
                                   res, completion, comp)
        decisions.append(decision)
        if completion - t > task.threshold_s:
            return fail("over threshold")
    delay = max(d.completion_s for d in decisions) - t
    return TaskRecord(task, scheme, True, delay, decisions)


def frozen_lengths(task: Task, scenario: Scenario, subtask_index: int = 0,
                   schemes=("fusion", "ground", "visible")) -> dict[str, float | None]:
    """Shortest-path length of one subtask under each scheme, ledger untouched."""
    t = task.gen_time_s
    snap = scenario.snapshot(t)
    src, dst = scenario.endpoints(task)
    out = {}
    for scheme in schemes:
        try:
            c = scenario.compiled(scheme, snap, src, dst)
        except MetagraphError:
            out[scheme] = None
            continue
        w = c.weights(task.subtasks[subtask_index], t, scenario.cfg.result_volume_bits,
                      scenario.spec.light_speed_m_s, scenario.distances(c, snap, src, dst))
        found = dijkstra(c.adjacency, w.tolist(), c.source, c.target)
        out[scheme] = None if found is None else found[1]
    return out


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def connection_index(cfg: ScenarioConfig, seed: int) -> dict[ZoneId, float]:
    if cfg.eta == "uniform":
        return traffic.synth_connection_index("uniform")
    if cfg.eta == "hotspots":
        return traffic.synth_connection_index("hotspots", k=cfg.hotspot_k,
                                              fraction=cfg.hotspot_fraction, seed=seed)
    path = cfg.eta[len("file:"):]
    try:
        return traffic.load_connection_index(path)
    except OSError as exc:
        raise traffic.TrafficError(f"cannot read connection index {path}: {exc}") from None


def derive_seeds(seed: int) -> tuple[int, int]:
    """Independent (connection-index, arrivals) seeds from the master seed."""
    eta_seed, task_seed = np.random.SeedSequence(seed).generate_state(2)
    return int(eta_seed), int(task_seed)


def make_tasks(cfg: ScenarioConfig, seed: int) -> tuple[list[Task], dict[ZoneId, float]]:
    eta_seed, task_seed = derive_seeds(seed)
    eta = connection_index(cfg, eta_seed)
    rates = traffic.arrival_rates(cfg.load, eta)
    if cfg.dest == "eta":
        sampler = traffic.eta_dest_sampler(eta)
    elif cfg.dest == "same_zone":
        sampler = traffic.same_zone_sampler
    else:
        sampler = traffic.uniform_dest_sampler()
    template = traffic.TaskTemplate(cfg.subtasks_per_task, cfg.subtask_gflo, cfg.subtask_gb,
                                    cfg.threshold_s)
    return traffic.generate_tasks(rates, cfg.duration_s, task_seed, template, sampler), eta


def run_simulation(cfg: ScenarioConfig, seed: int | None = None) -> SimulationResult:
    """Generate the workload and offload every task in (gen_time, id) order."""
    seed = cfg.seed if seed is None else seed
    tasks, eta = make_tasks(cfg, seed)
    scenario = Scenario(cfg)
    records = [offload_task(task, cfg.scheme, scenario) for task in tasks]
    log.debug("scheme=%s seed=%d tasks=%d", cfg.scheme, seed, len(records))
    hot = traffic.hotspots(eta, cfg.hotspot_k) if cfg.eta == "hotspots" else []
    return SimulationResult(records, cfg.replace(seed=seed).as_dict(), seed, hot)
