"""Brute-force verifiers for the shortest-path engine and the dominance of fusion.

Both checks are independent of the engine's search: paths are enumerated
exhaustively, and the dominance check compares the three schemes on one
frozen ledger view.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterator, Mapping

import numpy as np

from .engine import shortest_path
from .metagraph import (SCHEMES, Endpoint, MetagraphError, MetaNode, WeightedMetagraph,
                        assign_weights, build)
from .orbital import GeoPoint, SatelliteId, Snapshot, ZoneId
from .resources import Reservation, ResourceLedger
from .traffic import Subtask

MAX_NODES = 12


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleReport:
    instance: str
    oracle_value: object
    engine_value: object
    ok: bool

    def line(self) -> str:
        return f"{self.instance},{'true' if self.ok else 'false'}"


def brute_force_shortest_path(wg: WeightedMetagraph | Mapping[tuple, float],
                              source: Hashable, target: Hashable
                              ) -> tuple[list, float] | None:
    """Enumerate every simple path; shortest wins, ties go to the smaller node sequence.

    Path lengths are summed left to right along the path, as the engine does.
    """
    weights = wg.weights if isinstance(wg, WeightedMetagraph) else wg
    nodes = {source, target}
    succ: dict = {}
    for (a, b), w in weights.items():
        nodes.update((a, b))
        succ.setdefault(a, []).append((b, float(w)))
    if isinstance(wg, WeightedMetagraph):
        nodes.update(wg.graph.nodes)
    if len(nodes) > MAX_NODES:
        raise OracleError(f"{len(nodes)} nodes exceed the enumeration bound of {MAX_NODES}")
    if source == target:
        return [], 0.0
    best: tuple[float, list] | None = None
    for path, length in _simple_paths(succ, source, target):
        if best is None or (length, path) < best:
            best = (length, path)
    if best is None:
        return None
    return best[1], best[0]


def _simple_paths(succ, source, target) -> Iterator[tuple[list, float]]:
    stack = [(source, [source], 0.0)]
    while stack:
        node, path, length = stack.pop()
        for nxt, w in succ.get(node, ()):
            if nxt in path:
                continue
            if nxt == target:
                yield path + [nxt], length + w
            else:
                stack.append((nxt, path + [nxt], length + w))


def scheme_lengths(snapshot: Snapshot, subtask: Subtask, ledger: ResourceLedger, t: float,
                   u_visible, v_visible, source: Endpoint | None = None,
                   dest: Endpoint | None = None, result_volume_bits: float = 1e6,
                   literal_step16: bool = False) -> dict[str, float | None]:
    """Minimum u->v delay of each scheme on the same ledger view (``None``: unreachable)."""
    out = {}
    for scheme in SCHEMES:
        g = build(scheme, snapshot, u_visible, v_visible, source, dest)
        wg = assign_weights(g, subtask, ledger, t, result_volume_bits,
                            literal_step16=literal_step16)
        found = shortest_path(wg, g.nodes[0], g.nodes[-1])
        out[scheme] = None if found is None else found[1]
    return out


def check_theorem1(snapshot: Snapshot, subtask: Subtask, ledger: ResourceLedger, t: float,
                   u_visible, v_visible, source: Endpoint | None = None,
                   dest: Endpoint | None = None, **kwargs) -> bool | None:
    """True iff fusion is no slower than ground and visible; ``None`` if some scheme is unreachable."""
    try:
        lengths = scheme_lengths(snapshot, subtask, ledger, t, u_visible, v_visible, source, dest,
                                 **kwargs)
    except MetagraphError:
        return None
    if any(v is None for v in lengths.values()):
        return None
    return lengths["fusion"] <= lengths["ground"] and lengths["fusion"] <= lengths["visible"]


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def random_snapshot(rng: np.random.Generator, rows: int = 4, cols: int = 4, keep: float = 0.8,
                    t: float = 0.0) -> Snapshot:
    """Toroidal ``rows x cols`` VN grid with each link kept with probability ``keep``."""
    zones = tuple(ZoneId(r, c) for r in range(rows) for c in range(cols))
    edges = set()
    for r in range(rows):
        for c in range(cols):
            for nb in (ZoneId((r + 1) % rows, c), ZoneId(r, (c + 1) % cols)):
                a, b = sorted((ZoneId(r, c), nb))
                if a != b and rng.random() < keep:
                    edges.add((a, b))
    assoc = {z: SatelliteId(z.row, z.col) for z in zones}
    positions = {assoc[z]: GeoPoint(float(rng.uniform(-80, 80)), float(rng.uniform(-180, 180)),
                                    500e3) for z in zones}
    return Snapshot(time_s=t, vn_nodes=zones, vn_to_sat=assoc, isl_edges=frozenset(edges),
                    sat_positions=positions)


def random_ledger(rng: np.random.Generator, snapshot: Snapshot, source: Endpoint, dest: Endpoint,
                  t: float = 0.0, busy: int = 30) -> ResourceLedger:
    """Ledger with ``busy`` random reservations around ``t`` on random resources."""
    zones = list(snapshot.vn_nodes)
    ledger = ResourceLedger(zones, snapshot.isl_edges)
    pairs = sorted(snapshot.isl_edges)
    for k in range(busy):
        kind = rng.integers(4)
        z = zones[rng.integers(len(zones))]
        if kind == 0:
            key = ("compute", z)
        elif kind == 1 and pairs:
            a, b = pairs[rng.integers(len(pairs))]
            key = ("isl", a, b) if rng.random() < 0.5 else ("isl", b, a)
        elif kind == 2:
            key = ("sgl", z, dest.zone)
        else:
            key = ("uplink", source.zone, z)
        sched = ledger.schedule(key)
        length = float(rng.uniform(0.01, 10.0))
        start = sched.earliest_start(length, t + float(rng.uniform(-5.0, 20.0)))
        ledger.commit(Reservation(key, start, start + length, ("backlog", k)))
    return ledger


def _random_subset(rng, zones, lo=1, hi=4) -> frozenset[ZoneId]:
    n = int(rng.integers(lo, min(hi, len(zones)) + 1))
    return frozenset(zones[i] for i in rng.choice(len(zones), size=n, replace=False))


def _endpoints(rng, snapshot):
    zones = list(snapshot.vn_nodes)
    src = zones[rng.integers(len(zones))]
    dst = zones[rng.integers(len(zones))]
    return (Endpoint(src, GeoPoint(float(rng.uniform(-60, 60)), float(rng.uniform(-180, 180)),
                                   600e3)),
            Endpoint(dst, GeoPoint(float(rng.uniform(-60, 60)), float(rng.uniform(-180, 180)))))


def dominance_instance(seed: int):
    """One random dominance instance: (snapshot, subtask, ledger, t, u_vis, v_vis, src, dst)."""
    rng = np.random.default_rng(seed)
    t = float(rng.uniform(0.0, 10.0))
    snap = random_snapshot(rng, t=t)
    src, dst = _endpoints(rng, snap)
    ledger = random_ledger(rng, snap, src, dst, t)
    zones = list(snap.vn_nodes)
    sub = Subtask(float(rng.choice([10.0, 100.0, 500.0])), float(rng.choice([0.01, 0.1, 1.0])))
    return snap, sub, ledger, t, _random_subset(rng, zones), _random_subset(rng, zones), src, dst


def random_weighted_metagraph(seed: int, max_nodes: int = 10) -> WeightedMetagraph:
    """Small metagraph of a random scheme with random positive weights.

    Half the instances use small integer weights so that exact ties occur.
    """
    rng = np.random.default_rng(seed)
    max_zones = (max_nodes - 2) // 2
    n = int(rng.integers(1, max_zones + 1))
    rows = 1 if n < 4 else 2
    cols = n if n < 4 else n // 2
    snap = random_snapshot(rng, rows, cols, keep=0.9)
    zones = list(snap.vn_nodes)
    scheme = SCHEMES[int(rng.integers(len(SCHEMES)))]
    g = build(scheme, snap, _random_subset(rng, zones, 1, len(zones)),
              _random_subset(rng, zones, 1, len(zones)))
    if rng.random() < 0.5:
        w = {e: float(rng.integers(1, 4)) for e in sorted(g.edges)}
    else:
        w = {e: float(rng.uniform(0.001, 10.0)) for e in sorted(g.edges)}
    return WeightedMetagraph(g, w)


def random_digraph(seed: int, n: int = 8, p: float = 0.35) -> dict[tuple[int, int], float]:
    rng = np.random.default_rng(seed)
    integer = rng.random() < 0.5
    out = {}
    for a in range(n):
        for b in range(n):
            if a != b and rng.random() < p:
                out[(a, b)] = float(rng.integers(1, 4)) if integer else float(rng.uniform(0.01, 5))
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _same(oracle, engine, tol: float = 1e-9) -> bool:
    if oracle is None or engine is None:
        return oracle is None and engine is None
    return abs(oracle[1] - engine[1]) <= tol and list(oracle[0]) == list(engine[0])


def shortest_path_suite(n: int = 500, seed: int = 0) -> list[OracleReport]:
    out = []
    for k in range(n):
        wg = random_weighted_metagraph(seed * 100_003 + k)
        src: MetaNode = wg.graph.nodes[0]
        dst: MetaNode = wg.graph.nodes[-1]
        oracle = brute_force_shortest_path(wg, src, dst)
        engine = shortest_path(wg, src, dst)
        out.append(OracleReport(f"path-{k}", oracle, engine, _same(oracle, engine)))
    return out


def dominance_suite(n: int = 200, seed: int = 0) -> list[OracleReport]:
    """Dominance on ``n`` random instances; unreachable ones are reported as skipped (ok)."""
    out = []
    for k in range(n):
        snap, sub, ledger, t, u_vis, v_vis, src, dst = dominance_instance(seed * 100_003 + k)
        lengths = scheme_lengths(snap, sub, ledger, t, u_vis, v_vis, src, dst)
        if any(v is None for v in lengths.values()):
            out.append(OracleReport(f"dominance-{k}-skipped", lengths, None, True))
            continue
        ok = lengths["fusion"] <= lengths["ground"] and lengths["fusion"] <= lengths["visible"]
        out.append(OracleReport(f"dominance-{k}", min(lengths["ground"], lengths["visible"]),
                                lengths["fusion"], ok))
    return out


def validate(n_dominance: int = 200, n_paths: int = 500, seed: int = 0) -> list[OracleReport]:
    return dominance_suite(n_dominance, seed) + shortest_path_suite(n_paths, seed)


def summary(reports: list[OracleReport]) -> str:
    bad = sum(not r.ok for r in reports)
    skipped = sum(r.instance.endswith("-skipped") for r in reports)
    return f"instances={len(reports)} failures={bad} skipped={skipped}"
