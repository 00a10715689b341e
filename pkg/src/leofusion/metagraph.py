"""Two-tier computation/transmission metagraphs for the three offloading schemes.

Every VN appears twice: once in the *uncomputed* tier (raw data) and once in
the *computed* tier (results). A virtual edge ``z -> z^`` stands for
processing the subtask on VN ``z``; ISLs become intra-tier edges in both
directions. The source ``u`` feeds the uncomputed tier only and the
destination ``v`` is fed from one or both tiers, so any ``u -> v`` path
crosses at most one virtual edge.

Schemes
-------
fusion   both tiers with ISLs, a virtual edge at every VN, downlinks from both tiers
ground   uncomputed tier only, no virtual edges
visible  edgeless uncomputed tier, virtual edges only at VNs the source sees,
         ISLs in the computed tier, downlinks from the computed tier
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .orbital import GeoPoint, Snapshot, ZoneId, to_ecef
from .resources import ResourceLedger
from .traffic import Subtask

SCHEMES = ("fusion", "ground", "visible")
DEFAULT_RESULT_BITS = 1e6
LIGHT_SPEED = 299_792_458.0


class MetagraphError(ValueError):
    pass


class Tier(enum.IntEnum):
    UNCOMPUTED = 0
    COMPUTED = 1


class EdgeKind(str, enum.Enum):
    INTRA = "intra"
    VIRTUAL = "virtual"
    UPLINK = "uplink"
    DOWNLINK = "downlink"


class MetaNode(NamedTuple):
    """Tuple ordering is the node-id order used for tie-breaking:
    ``u`` < uncomputed VNs < computed VNs < ``v``, VNs by zone."""

    rank: int
    row: int = -1
    col: int = -1

    @property
    def is_vn(self) -> bool:
        return self.rank in (1, 2)

    @property
    def tier(self) -> Tier | None:
        return Tier(self.rank - 1) if self.is_vn else None

    @property
    def zone(self) -> ZoneId | None:
        return ZoneId(self.row, self.col) if self.is_vn else None

    def __str__(self):
        if self.rank == 0:
            return "u"
        if self.rank == 3:
            return "v"
        return f"{'c' if self.rank == 2 else 'n'}{self.row}_{self.col}"


SOURCE = MetaNode(0)
DEST = MetaNode(3)


def vn(zone: ZoneId, tier: Tier = Tier.UNCOMPUTED) -> MetaNode:
    return MetaNode(1 + int(tier), zone[0], zone[1])


@dataclass(frozen=True)
class Endpoint:
    zone: ZoneId
    point: GeoPoint


@dataclass(frozen=True, eq=False)
class Metagraph:
    scheme: str
    nodes: tuple[MetaNode, ...]
    edges: dict[tuple[MetaNode, MetaNode], EdgeKind]
    u_visible: frozenset[ZoneId]
    v_visible: frozenset[ZoneId]
    snapshot: Snapshot = field(repr=False)
    source: Endpoint
    dest: Endpoint

    def virtual_edges(self) -> list[tuple[MetaNode, MetaNode]]:
        return [e for e, k in self.edges.items() if k is EdgeKind.VIRTUAL]

    def successors(self, node: MetaNode) -> list[MetaNode]:
        return sorted(b for a, b in self.edges if a == node)

    def resource(self, edge: tuple[MetaNode, MetaNode]) -> tuple:
        """Ledger key of the physical resource an edge occupies."""
        a, b = edge
        kind = self.edges[edge]
        if kind is EdgeKind.INTRA:
            return ("isl", a.zone, b.zone)
        if kind is EdgeKind.VIRTUAL:
            return ("compute", a.zone)
        if kind is EdgeKind.UPLINK:
            return ("uplink", self.source.zone, b.zone)
        return ("sgl", a.zone, self.dest.zone)

    def export_edges(self, path, weights: dict | None = None) -> None:
        """Debug dump: one ``from,to,kind,weight`` line per edge."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("from,to,kind,weight\n")
            for (a, b), kind in sorted(self.edges.items()):
                w = "" if weights is None else repr(float(weights[(a, b)]))
                fh.write(f"{a},{b},{kind.value},{w}\n")


def _check(u_visible, v_visible):
    if not u_visible:
        raise MetagraphError("unreachable endpoint: source sees no VN")
    if not v_visible:
        raise MetagraphError("unreachable endpoint: destination sees no VN")


def _directed(isl_edges: Iterable[tuple[ZoneId, ZoneId]]):
    for a, b in sorted(isl_edges):
        yield a, b
        yield b, a


def _make(scheme, snapshot, u_visible, v_visible, source, dest, *, uncomputed_isl,
          computed_isl, virtual_zones, down_tiers, computed_nodes=True) -> Metagraph:
    u_visible = frozenset(ZoneId(*z) for z in u_visible)
    v_visible = frozenset(ZoneId(*z) for z in v_visible)
    _check(u_visible, v_visible)
    zones = [ZoneId(*z) for z in snapshot.vn_nodes]
    unknown = (u_visible | v_visible) - set(zones)
    if unknown:
        raise MetagraphError(f"visible VNs not in snapshot: {sorted(unknown)}")
    nodes = [SOURCE, DEST] + [vn(z) for z in zones]
    if computed_nodes:
        nodes += [vn(z, Tier.COMPUTED) for z in zones]
    edges: dict[tuple[MetaNode, MetaNode], EdgeKind] = {}
    for a, b in _directed(snapshot.isl_edges):
        if uncomputed_isl:
            edges[(vn(a), vn(b))] = EdgeKind.INTRA
        if computed_isl:
            edges[(vn(a, Tier.COMPUTED), vn(b, Tier.COMPUTED))] = EdgeKind.INTRA
    for z in sorted(virtual_zones):
        edges[(vn(z), vn(z, Tier.COMPUTED))] = EdgeKind.VIRTUAL
    for z in sorted(u_visible):
        edges[(SOURCE, vn(z))] = EdgeKind.UPLINK
    for z in sorted(v_visible):
        for tier in down_tiers:
            edges[(vn(z, tier), DEST)] = EdgeKind.DOWNLINK
    return Metagraph(scheme, tuple(sorted(nodes)), edges, u_visible, v_visible,
                     snapshot, source, dest)


def _endpoint(e, default_zone) -> Endpoint:
    if e is None:
        return Endpoint(default_zone, GeoPoint(0.0, 0.0, 0.0))
    return e


def build_fusion(snapshot: Snapshot, u_visible, v_visible, source: Endpoint | None = None,
                 dest: Endpoint | None = None) -> Metagraph:
    zones = list(snapshot.vn_nodes)
    return _make("fusion", snapshot, u_visible, v_visible,
                 _endpoint(source, ZoneId(-1, -1)), _endpoint(dest, ZoneId(-2, -2)),
                 uncomputed_isl=True, computed_isl=True, virtual_zones=zones,
                 down_tiers=(Tier.UNCOMPUTED, Tier.COMPUTED))


def build_ground(snapshot: Snapshot, u_visible, v_visible, source: Endpoint | None = None,
                 dest: Endpoint | None = None) -> Metagraph:
    return _make("ground", snapshot, u_visible, v_visible,
                 _endpoint(source, ZoneId(-1, -1)), _endpoint(dest, ZoneId(-2, -2)),
                 uncomputed_isl=True, computed_isl=False, virtual_zones=(),
                 down_tiers=(Tier.UNCOMPUTED,), computed_nodes=False)


def build_visible(snapshot: Snapshot, u_visible, v_visible, source: Endpoint | None = None,
                  dest: Endpoint | None = None) -> Metagraph:
    return _make("visible", snapshot, u_visible, v_visible,
                 _endpoint(source, ZoneId(-1, -1)), _endpoint(dest, ZoneId(-2, -2)),
                 uncomputed_isl=False, computed_isl=True, virtual_zones=u_visible,
                 down_tiers=(Tier.COMPUTED,))


BUILDERS = {"fusion": build_fusion, "ground": build_ground, "visible": build_visible}


def build(scheme: str, snapshot: Snapshot, u_visible, v_visible, source=None, dest=None) -> Metagraph:
    try:
        builder = BUILDERS[scheme]
    except KeyError:
        raise MetagraphError(f"unknown scheme {scheme!r}") from None
    return builder(snapshot, u_visible, v_visible, source, dest)


def is_subgraph(a: Metagraph, b: Metagraph) -> bool:
    if not set(a.nodes) <= set(b.nodes):
        return False
    return all(b.edges.get(e) is k for e, k in a.edges.items())


# demand classes of an edge
_COMPUTE, _RAW, _RESULT = 0, 1, 2
_FIELDS = ("tail", "head", "res_idx", "demand_class", "pt_a", "pt_b")


def _edge_rows(edges, kinds, snapshot: Snapshot, pos, ledger: ResourceLedger,
               literal_step16: bool, source_zone, dest_zone):
    """Array columns plus resource keys for a list of edges."""
    order = snapshot.sat_order
    assoc = snapshot.vn_to_sat
    src_pt, dst_pt = len(order), len(order) + 1
    rows = {f: [] for f in _FIELDS}
    keys, caps = [], []
    for (a, b), kind in zip(edges, kinds):
        if kind is EdgeKind.INTRA:
            za, zb = ZoneId(a[1], a[2]), ZoneId(b[1], b[2])
            key = ("isl", za, zb)
            demand = _RESULT if a[0] == 2 and not literal_step16 else _RAW
            pa, pb = order[assoc[za]], order[assoc[zb]]
        elif kind is EdgeKind.VIRTUAL:
            za = ZoneId(a[1], a[2])
            key = ("compute", za)
            demand = _COMPUTE
            pa = pb = order[assoc[za]]
        elif kind is EdgeKind.UPLINK:
            zb = ZoneId(b[1], b[2])
            key = ("uplink", source_zone, zb)
            demand = _RAW
            pa, pb = src_pt, order[assoc[zb]]
        else:
            za = ZoneId(a[1], a[2])
            key = ("sgl", za, dest_zone)
            demand = _RESULT if a[0] == 2 and not literal_step16 else _RAW
            pa, pb = order[assoc[za]], dst_pt
        keys.append(key)
        caps.append(ledger.capacity[key[0]])
        for f, v in zip(_FIELDS, (pos[a], pos[b], ledger.index(key), demand, pa, pb)):
            rows[f].append(v)
    arrays = {f: np.asarray(v, dtype=np.int64) for f, v in rows.items()}
    arrays["capacity"] = np.asarray(caps, dtype=float)
    return arrays, keys


class CompiledMetagraph:
    """Index-based form of a metagraph bound to one ledger.

    Node ids are positions in ``nodes`` (already in tie-break order), so
    integer comparisons reproduce the MetaNode ordering. Edge order carries
    no meaning.
    """

    def __init__(self, graph: Metagraph, ledger: ResourceLedger, literal_step16: bool = False):
        pos = {n: i for i, n in enumerate(graph.nodes)}
        edges = sorted(graph.edges)
        arrays, keys = _edge_rows(edges, [graph.edges[e] for e in edges], graph.snapshot, pos,
                                  ledger, literal_step16, graph.source.zone, graph.dest.zone)
        adj: list[list[tuple[int, int]]] = [[] for _ in graph.nodes]
        for i, (a, b) in enumerate(edges):
            adj[pos[a]].append((pos[b], i))
        self._setup(graph.scheme, graph.nodes, pos, edges, [graph.edges[e] for e in edges],
                    keys, arrays, adj, ledger, graph.snapshot, graph.u_visible, graph.v_visible,
                    graph.source, graph.dest)
        self._graph = graph

    def _setup(self, scheme, nodes, pos, edge_list, kinds, keys, arrays, adjacency, ledger,
               snapshot, u_visible, v_visible, source, dest):
        self.scheme = scheme
        self.nodes = nodes
        self.node_index = pos
        self.edge_list = edge_list
        self.kinds = kinds
        self.keys = keys
        for f in _FIELDS + ("capacity",):
            setattr(self, f, arrays[f])
        self.adjacency = adjacency
        self.ledger = ledger
        self.snapshot = snapshot
        self.u_visible = u_visible
        self.v_visible = v_visible
        self.source_endpoint = source
        self.dest_endpoint = dest
        self.source = pos[SOURCE]
        self.target = pos[DEST]
        self._graph = None

    def edge_index(self, a: int, b: int) -> int:
        for y, i in self.adjacency[a]:
            if y == b:
                return i
        raise KeyError((a, b))

    @property
    def graph(self) -> Metagraph:
        if self._graph is None:
            self._graph = build(self.scheme, self.snapshot, self.u_visible, self.v_visible,
                                self.source_endpoint, self.dest_endpoint)
        return self._graph

    @cached_property
    def distances(self) -> np.ndarray:
        snap = self.snapshot
        pts = np.vstack([snap.sat_ecef.reshape(-1, 3),
                         to_ecef(self.source_endpoint.point, snap.earth_radius_m),
                         to_ecef(self.dest_endpoint.point, snap.earth_radius_m)])
        return np.linalg.norm(pts[self.pt_a] - pts[self.pt_b], axis=1)

    def durations(self, subtask: Subtask, result_volume_bits: float) -> np.ndarray:
        demand = np.choose(self.demand_class,
                           [subtask.flop_g, subtask.volume_bits, float(result_volume_bits)])
        return demand / self.capacity

    def weights(self, subtask: Subtask, t: float, result_volume_bits: float = DEFAULT_RESULT_BITS,
                light_speed: float = LIGHT_SPEED, distances: np.ndarray | None = None) -> np.ndarray:
        """Per-edge delay (waiting + service + propagation) as seen at time ``t``."""
        dur = self.durations(subtask, result_volume_bits)
        wait = self.ledger.earliest_starts(self.res_idx, dur, t) - t
        dist = self.distances if distances is None else distances
        return (wait + dur) + dist / light_speed


_LAYOUT = {
    # uncomputed ISLs, computed ISLs, virtual edges, downlink tiers, computed tier present
    "fusion": (True, True, "all", (Tier.UNCOMPUTED, Tier.COMPUTED), True),
    "ground": (True, False, "none", (Tier.UNCOMPUTED,), False),
    "visible": (False, True, "u_visible", (Tier.COMPUTED,), True),
}


class MetagraphCompiler:
    """Builds compiled metagraphs for one ledger, reusing the VN-to-VN part.

    ISL and (for fusion) virtual edges depend only on the VN association and
    the active ISL set, so they are compiled once per topology; uplinks,
    downlinks and visibility-dependent virtual edges are appended per request.
    """

    def __init__(self, ledger: ResourceLedger, literal_step16: bool = False, max_cores: int = 256):
        self.ledger = ledger
        self.literal_step16 = literal_step16
        self.max_cores = max_cores
        self._cores: dict = {}

    def _core(self, scheme: str, snapshot: Snapshot):
        key = (scheme, tuple(snapshot.vn_to_sat[z] for z in snapshot.vn_nodes), snapshot.isl_edges)
        core = self._cores.get(key)
        if core is not None:
            return core
        unc_isl, comp_isl, virtual, _, comp_nodes = _LAYOUT[scheme]
        zones = sorted(ZoneId(*z) for z in snapshot.vn_nodes)
        nodes = [SOURCE, DEST] + [vn(z) for z in zones]
        if comp_nodes:
            nodes += [vn(z, Tier.COMPUTED) for z in zones]
        nodes = tuple(sorted(nodes))
        pos = {n: i for i, n in enumerate(nodes)}
        edges, kinds = [], []
        for a, b in _directed(snapshot.isl_edges):
            if unc_isl:
                edges.append((vn(a), vn(b)))
                kinds.append(EdgeKind.INTRA)
            if comp_isl:
                edges.append((vn(a, Tier.COMPUTED), vn(b, Tier.COMPUTED)))
                kinds.append(EdgeKind.INTRA)
        if virtual == "all":
            for z in zones:
                edges.append((vn(z), vn(z, Tier.COMPUTED)))
                kinds.append(EdgeKind.VIRTUAL)
        arrays, keys = _edge_rows(edges, kinds, snapshot, pos, self.ledger, self.literal_step16,
                                  None, None)
        adj: list[list[tuple[int, int]]] = [[] for _ in nodes]
        for i, (a, b) in enumerate(edges):
            adj[pos[a]].append((pos[b], i))
        if len(self._cores) >= self.max_cores:
            self._cores.clear()
        core = (nodes, pos, edges, kinds, keys, arrays, adj, frozenset(zones))
        self._cores[key] = core
        return core

    def compile(self, scheme: str, snapshot: Snapshot, u_visible, v_visible,
                source: Endpoint, dest: Endpoint) -> CompiledMetagraph:
        if scheme not in _LAYOUT:
            raise MetagraphError(f"unknown scheme {scheme!r}")
        u_visible = frozenset(ZoneId(*z) for z in u_visible)
        v_visible = frozenset(ZoneId(*z) for z in v_visible)
        _check(u_visible, v_visible)
        nodes, pos, core_edges, core_kinds, core_keys, core_arrays, core_adj, zones = \
            self._core(scheme, snapshot)
        unknown = (u_visible | v_visible) - zones
        if unknown:
            raise MetagraphError(f"visible VNs not in snapshot: {sorted(unknown)}")
        _, _, virtual, down_tiers, _ = _LAYOUT[scheme]
        edges, kinds = [], []
        if virtual == "u_visible":
            for z in sorted(u_visible):
                edges.append((vn(z), vn(z, Tier.COMPUTED)))
                kinds.append(EdgeKind.VIRTUAL)
        for z in sorted(u_visible):
            edges.append((SOURCE, vn(z)))
            kinds.append(EdgeKind.UPLINK)
        for z in sorted(v_visible):
            for tier in down_tiers:
                edges.append((vn(z, tier), DEST))
                kinds.append(EdgeKind.DOWNLINK)
        arrays, keys = _edge_rows(edges, kinds, snapshot, pos, self.ledger, self.literal_step16,
                                  source.zone, dest.zone)
        merged = {f: np.concatenate([core_arrays[f], arrays[f]]) for f in core_arrays}
        adj = [list(x) for x in core_adj]
        base = len(core_edges)
        for i, (a, b) in enumerate(edges):
            adj[pos[a]].append((pos[b], base + i))
        c = CompiledMetagraph.__new__(CompiledMetagraph)
        c._setup(scheme, nodes, pos, core_edges + edges, core_kinds + kinds, core_keys + keys,
                 merged, adj, self.ledger, snapshot, u_visible, v_visible, source, dest)
        return c


@dataclass(frozen=True, eq=False)
class WeightedMetagraph:
    graph: Metagraph
    weights: dict[tuple[MetaNode, MetaNode], float]

    def __post_init__(self):
        for e, w in self.weights.items():
            if not (np.isfinite(w) and w >= 0):
                raise MetagraphError(f"edge {e} has invalid weight {w}")


def assign_weights(g: Metagraph, subtask: Subtask, ledger: ResourceLedger, t: float,
                   result_volume_bits: float = DEFAULT_RESULT_BITS, *,
                   literal_step16: bool = False, light_speed: float = LIGHT_SPEED) -> WeightedMetagraph:
    """Weight every edge for one subtask against the ledger as it stands at ``t``.

    Virtual edges carry computation delay; uplinks, uncomputed-tier ISLs and
    downlinks from the uncomputed tier carry the raw volume; computed-tier
    ISLs and downlinks carry the result volume (raw volume too when
    ``literal_step16`` is set).
    """
    c = CompiledMetagraph(g, ledger, literal_step16)
    w = c.weights(subtask, t, result_volume_bits, light_speed)
    return WeightedMetagraph(g, {e: float(x) for e, x in zip(c.edge_list, w)})
