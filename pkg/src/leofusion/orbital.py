"""Walker-star constellation geometry and the virtual-node (VN) mesh.

Satellites fly circular polar orbits. The Earth is cut into a fixed grid of
22.5 deg zones; each zone is a virtual node carried by whichever satellite is
currently nearest to the zone centre. The VN mesh topology is static (it
mirrors the satellite grid), only the zone-to-satellite association and the
satellite positions change with time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

# Zone-centre distance slack under which two satellites count as tied.
_TIE_TOL_M = 1e-6
# Elevation slack so that a satellite exactly on the mask counts as visible.
_ELEVATION_TOL_DEG = 1e-9


class SatelliteId(NamedTuple):
    plane: int
    slot: int


class ZoneId(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class GeoPoint:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ValueError(f"longitude out of range: {self.longitude_deg}")
        if self.altitude_m < 0:
            raise ValueError(f"negative altitude: {self.altitude_m}")


@dataclass(frozen=True)
class ConstellationSpec:
    """Walker-star constellation plus the physical constants it needs.

    Defaults are the simulation parameters of the reference scenario
    (8 planes x 16 satellites at 500 km).
    """

    num_orbits: int = 8
    sats_per_orbit: int = 16
    altitude_m: float = 500e3
    inclination_deg: float = 90.0
    earth_radius_m: float = 6_371_393.0
    earth_mass_kg: float = 5.965e24
    grav_const: float = 6.67428e-11
    kepler_const: float = 3.9860e14
    earth_rotation_rad_s: float = 7.29211510e-5
    polar_mask_deg: float = 75.0
    elevation_min_deg: float = 5.0
    light_speed_m_s: float = 299_792_458.0
    max_slant_range_m: float = 7_800e3
    source_altitude_m: float = 600e3

    def __post_init__(self):
        if self.num_orbits < 1 or self.sats_per_orbit < 1:
            raise ValueError("constellation needs at least one plane and one satellite")
        if self.altitude_m <= 0:
            raise ValueError("altitude_m must be positive")
        if not 0.0 <= self.polar_mask_deg <= 90.0:
            raise ValueError("polar_mask_deg must lie in [0, 90]")
        for name in ("earth_radius_m", "earth_mass_kg", "grav_const", "kepler_const",
                     "earth_rotation_rad_s", "light_speed_m_s", "max_slant_range_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def orbit_radius_m(self) -> float:
        return self.earth_radius_m + self.altitude_m

    def satellites(self) -> list[SatelliteId]:
        return [SatelliteId(p, s) for p in range(self.num_orbits)
                for s in range(self.sats_per_orbit)]


@dataclass(frozen=True)
class ZoneGrid:
    cell_deg: float = 22.5

    @property
    def rows(self) -> int:
        return int(round(180.0 / self.cell_deg))

    @property
    def cols(self) -> int:
        return int(round(360.0 / self.cell_deg))

    def zones(self) -> list[ZoneId]:
        return list(_zone_list(self.rows, self.cols))

    def center(self, zone: ZoneId, altitude_m: float = 0.0) -> GeoPoint:
        return GeoPoint(-90.0 + self.cell_deg * (zone.row + 0.5),
                        -180.0 + self.cell_deg * (zone.col + 0.5),
                        altitude_m)


@lru_cache(maxsize=8)
def _zone_list(rows: int, cols: int) -> tuple[ZoneId, ...]:
    return tuple(ZoneId(r, c) for r in range(rows) for c in range(cols))


@lru_cache(maxsize=8)
def _center_vectors(grid: ZoneGrid) -> np.ndarray:
    zones = grid.zones()
    return _unit_vectors(np.array([-90.0 + grid.cell_deg * (z.row + 0.5) for z in zones]),
                         np.array([-180.0 + grid.cell_deg * (z.col + 0.5) for z in zones]))


@dataclass(frozen=True)
class Snapshot:
    """Static VN mesh valid at one instant."""

    time_s: float
    vn_nodes: tuple[ZoneId, ...]
    vn_to_sat: dict[ZoneId, SatelliteId]
    isl_edges: frozenset[tuple[ZoneId, ZoneId]]
    sat_positions: dict[SatelliteId, GeoPoint]
    earth_radius_m: float = 6_371_393.0
    inter_plane: frozenset[tuple[ZoneId, ZoneId]] = field(default=frozenset(), repr=False)

    def vn_position(self, zone: ZoneId) -> GeoPoint:
        return self.sat_positions[self.vn_to_sat[zone]]

    def neighbors(self, zone: ZoneId) -> list[ZoneId]:
        return sorted({b for a, b in self.isl_edges if a == zone}
                      | {a for a, b in self.isl_edges if b == zone})

    @cached_property
    def sat_order(self) -> dict[SatelliteId, int]:
        """Row of each satellite in :attr:`sat_ecef`."""
        return {s: i for i, s in enumerate(sorted(self.sat_positions))}

    @cached_property
    def sat_ecef(self) -> np.ndarray:
        sats = sorted(self.sat_positions)
        if not sats:
            return np.empty((0, 3))
        lat = np.array([self.sat_positions[s].latitude_deg for s in sats])
        lon = np.array([self.sat_positions[s].longitude_deg for s in sats])
        alt = np.array([self.sat_positions[s].altitude_m for s in sats])
        return _unit_vectors(lat, lon) * (self.earth_radius_m + alt)[:, None]


def orbital_period(spec: ConstellationSpec) -> float:
    """Circular-orbit period in seconds, from the Kepler constant."""
    return 2.0 * math.pi * math.sqrt(spec.orbit_radius_m ** 3 / spec.kepler_const)


def to_ecef(point: GeoPoint, earth_radius_m: float = 6_371_393.0) -> np.ndarray:
    r = earth_radius_m + point.altitude_m
    lat = math.radians(point.latitude_deg)
    lon = math.radians(point.longitude_deg)
    return np.array([r * math.cos(lat) * math.cos(lon),
                     r * math.cos(lat) * math.sin(lon),
                     r * math.sin(lat)])


def _wrap_lon(lon_deg):
    return (np.asarray(lon_deg) + 180.0) % 360.0 - 180.0


def _positions(spec: ConstellationSpec, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Latitude and longitude (deg) of every satellite, shape (N_o, N_s)."""
    period = orbital_period(spec)
    planes = np.arange(spec.num_orbits)[:, None]
    slots = np.arange(spec.sats_per_orbit)[None, :]
    u = np.radians(360.0 * slots / spec.sats_per_orbit + 360.0 * t / period)
    raan = np.radians(180.0 * planes / spec.num_orbits
                      - math.degrees(spec.earth_rotation_rad_s * t))
    inc = math.radians(spec.inclination_deg)
    x = np.cos(raan) * np.cos(u) - np.sin(raan) * np.sin(u) * math.cos(inc)
    y = np.sin(raan) * np.cos(u) + np.cos(raan) * np.sin(u) * math.cos(inc)
    z = np.sin(u) * math.sin(inc) * np.ones_like(raan)
    lat = np.degrees(np.arctan2(z, np.hypot(x, y)))
    lon = _wrap_lon(np.degrees(np.arctan2(y, x)))
    return lat, lon


def satellite_position(spec: ConstellationSpec, sat: SatelliteId, t: float) -> GeoPoint:
    if not (0 <= sat.plane < spec.num_orbits and 0 <= sat.slot < spec.sats_per_orbit):
        raise ValueError(f"satellite {sat} outside the constellation")
    lat, lon = _positions(spec, t)
    return GeoPoint(float(lat[sat.plane, sat.slot]), float(lon[sat.plane, sat.slot]),
                    spec.altitude_m)


def zone_of(point: GeoPoint, grid: ZoneGrid = ZoneGrid()) -> ZoneId:
    row = min(max(int(math.floor((point.latitude_deg + 90.0) / grid.cell_deg)), 0), grid.rows - 1)
    col = int(math.floor((point.longitude_deg + 180.0) / grid.cell_deg)) % grid.cols
    return ZoneId(row, col)


def distance_m(a: GeoPoint, b: GeoPoint, earth_radius_m: float = 6_371_393.0) -> float:
    """Straight-line (chord) distance between two points."""
    return float(np.linalg.norm(to_ecef(a, earth_radius_m) - to_ecef(b, earth_radius_m)))


def _unit_vectors(lat_deg, lon_deg) -> np.ndarray:
    lat = np.radians(lat_deg)
    lon = np.radians(lon_deg)
    return np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1)


def vn_association(spec: ConstellationSpec, grid: ZoneGrid, t: float) -> dict[ZoneId, SatelliteId]:
    """Map every zone to the satellite nearest its centre (ties: lowest id)."""
    lat, lon = _positions(spec, t)
    sats = _unit_vectors(lat.ravel(), lon.ravel())
    zones = grid.zones()
    centers = _center_vectors(grid)
    # great-circle distance on the orbit shell, in metres
    cosang = np.clip(centers @ sats.T, -1.0, 1.0)
    dist = np.arccos(cosang) * spec.orbit_radius_m
    best = dist.min(axis=1, keepdims=True)
    # first column within tolerance is the lowest (plane, slot) in row-major order
    idx = np.argmax(dist <= best + _TIE_TOL_M, axis=1)
    n_s = spec.sats_per_orbit
    return {z: SatelliteId(int(i) // n_s, int(i) % n_s) for z, i in zip(zones, idx)}


def home_zone(spec: ConstellationSpec, sat: SatelliteId, grid: ZoneGrid = ZoneGrid()) -> ZoneId:
    """Zone a satellite grid position stands for in the static VN mesh.

    Ascending half-orbits cover the eastern columns, descending half-orbits
    the western ones, so the 2*N_o half-planes tile the grid columns and the
    N_s/2 satellites of each half-plane tile the rows.
    """
    n_s = spec.sats_per_orbit
    half = n_s // 2
    quarter = n_s // 4
    if grid.cols != 2 * spec.num_orbits or grid.rows != half:
        raise ValueError("zone grid does not match the satellite grid")
    ascending = sat.slot >= n_s - quarter or sat.slot < quarter
    if ascending:
        return ZoneId((sat.slot + quarter) % n_s, sat.plane + spec.num_orbits)
    return ZoneId(n_s - quarter - 1 - sat.slot, sat.plane)


def grid_links(spec: ConstellationSpec) -> tuple[list[tuple[SatelliteId, SatelliteId]],
                                                  list[tuple[SatelliteId, SatelliteId]]]:
    """Intra-plane ring links and inter-plane links, seam excluded."""
    intra, inter = [], []
    n_o, n_s = spec.num_orbits, spec.sats_per_orbit
    for p in range(n_o):
        for s in range(n_s):
            if n_s > 1:
                intra.append((SatelliteId(p, s), SatelliteId(p, (s + 1) % n_s)))
            # plane N_o-1 -> plane 0 is the counter-rotating seam
            if p + 1 < n_o:
                inter.append((SatelliteId(p, s), SatelliteId(p + 1, s)))
    return intra, inter


def _ordered(a: ZoneId, b: ZoneId) -> tuple[ZoneId, ZoneId]:
    return (a, b) if a <= b else (b, a)


@lru_cache(maxsize=16)
def all_vn_links(spec: ConstellationSpec, grid: ZoneGrid = ZoneGrid()
                 ) -> tuple[frozenset[tuple[ZoneId, ZoneId]], frozenset[tuple[ZoneId, ZoneId]]]:
    """Every VN link that may ever be active: (intra-plane, inter-plane)."""
    intra, inter = grid_links(spec)
    def conv(links):
        return frozenset(_ordered(home_zone(spec, a, grid), home_zone(spec, b, grid))
                         for a, b in links)
    return conv(intra), conv(inter)


def build_snapshot(spec: ConstellationSpec, grid: ZoneGrid, t: float) -> Snapshot:
    lat, lon = _positions(spec, t)
    positions = {SatelliteId(p, s): GeoPoint(float(lat[p, s]), float(lon[p, s]), spec.altitude_m)
                 for p in range(spec.num_orbits) for s in range(spec.sats_per_orbit)}
    assoc = vn_association(spec, grid, t)
    intra, inter = all_vn_links(spec, grid)

    def polar(zone):
        return abs(positions[assoc[zone]].latitude_deg) > spec.polar_mask_deg

    kept_inter = frozenset(e for e in inter if not (polar(e[0]) or polar(e[1])))
    return Snapshot(time_s=t, vn_nodes=tuple(grid.zones()), vn_to_sat=assoc,
                    isl_edges=intra | kept_inter, sat_positions=positions,
                    earth_radius_m=spec.earth_radius_m, inter_plane=kept_inter)


def elevation_deg(ground: GeoPoint, target: GeoPoint, earth_radius_m: float = 6_371_393.0) -> float:
    g = to_ecef(ground, earth_radius_m)
    s = to_ecef(target, earth_radius_m)
    los = s - g
    up = g / np.linalg.norm(g)
    return math.degrees(math.asin(float(np.clip(los @ up / np.linalg.norm(los), -1.0, 1.0))))


def line_of_sight(a: np.ndarray, b: np.ndarray, earth_radius_m: float) -> bool:
    """True when the segment a-b does not dip below the Earth's surface."""
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return True
    k = min(max(-float(a @ d) / dd, 0.0), 1.0)
    return float(np.linalg.norm(a + k * d)) >= earth_radius_m


def visible_nodes(point: GeoPoint, snapshot: Snapshot, spec: ConstellationSpec) -> set[ZoneId]:
    """VNs whose associated satellite can talk to ``point``.

    Ground points (altitude 0) use the elevation mask. Space points use the
    maximum slant range plus an Earth-blockage check.
    """
    sats = snapshot.sat_ecef
    if len(sats) == 0:
        return set()
    p = to_ecef(point, snapshot.earth_radius_m)
    los = sats - p
    rng = np.linalg.norm(los, axis=1)
    if point.altitude_m == 0.0:
        up = p / np.linalg.norm(p)
        sin_el = np.clip((los @ up) / rng, -1.0, 1.0)
        ok = np.degrees(np.arcsin(sin_el)) >= spec.elevation_min_deg - _ELEVATION_TOL_DEG
    else:
        # closest approach of each segment p->sat to the Earth centre
        k = np.clip(-(los @ p) / np.maximum(rng ** 2, 1e-300), 0.0, 1.0)
        closest = np.linalg.norm(p + k[:, None] * los, axis=1)
        ok = (rng <= spec.max_slant_range_m) & (closest >= snapshot.earth_radius_m)
    order = snapshot.sat_order
    return {z for z in snapshot.vn_nodes if ok[order[snapshot.vn_to_sat[z]]]}
