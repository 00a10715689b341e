"""Exclusive FIFO capacity schedules for links and onboard processors.

Every resource (an ISL direction, a satellite-to-ground link, a source uplink,
a VN processor) serves one subtask at a time at full rate. A request is placed
in the earliest idle gap that fits it, so delay = waiting + demand / capacity.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

GROUND = "ground"

ResourceKey = tuple


class ResourceError(KeyError):
    """Unknown resource, unknown reservation, or conflicting commit."""


@dataclass(frozen=True)
class Reservation:
    resource: ResourceKey
    start_s: float
    end_s: float
    owner: Hashable = None

    def __post_init__(self):
        if not self.end_s > self.start_s:
            raise ValueError(f"empty reservation interval [{self.start_s}, {self.end_s})")


class CapacitySchedule:
    """Disjoint half-open busy intervals on one resource.

    ``blocks`` holds the merged busy periods used by the gap search;
    ``reservations`` keeps the individual entries so they can be released.
    """

    def __init__(self, capacity: float):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = float(capacity)
        self._starts: list[float] = []
        self._ends: list[float] = []
        self._owners: list[Hashable] = []
        self._block_starts: list[float] = []
        self._block_ends: list[float] = []

    def __len__(self):
        return len(self._starts)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self._starts, self._ends))

    @property
    def busy_until(self) -> float:
        return self._block_ends[-1] if self._block_ends else float("-inf")

    @property
    def last_block_start(self) -> float:
        return self._block_starts[-1] if self._block_starts else float("-inf")

    def earliest_start(self, duration: float, earliest: float) -> float:
        return self.placement(duration, earliest)[0]

    def placement(self, duration: float, earliest: float) -> tuple[float, float]:
        """Earliest feasible start and the start of the next busy block after it."""
        ends = self._block_ends
        if not ends or ends[-1] <= earliest:
            return earliest, float("inf")
        starts = self._block_starts
        i = bisect.bisect_right(ends, earliest)
        cand = earliest
        for j in range(i, len(starts)):
            if starts[j] >= cand + duration:
                return cand, starts[j]
            if ends[j] > cand:
                cand = ends[j]
        return cand, float("inf")

    def overlaps(self, start: float, end: float) -> bool:
        i = bisect.bisect_right(self._block_ends, start)
        return i < len(self._block_starts) and self._block_starts[i] < end

    def add(self, start: float, end: float, owner: Hashable = None) -> None:
        if self.overlaps(start, end):
            raise ResourceError(f"interval [{start}, {end}) overlaps an existing reservation")
        i = bisect.bisect_left(self._starts, start)
        self._starts.insert(i, start)
        self._ends.insert(i, end)
        self._owners.insert(i, owner)
        self._merge_block(start, end)

    def remove(self, start: float, end: float, owner: Hashable = None) -> None:
        i = bisect.bisect_left(self._starts, start)
        if i == len(self._starts) or self._starts[i] != start or self._ends[i] != end \
                or self._owners[i] != owner:
            raise ResourceError(f"no reservation [{start}, {end}) owned by {owner!r}")
        del self._starts[i], self._ends[i], self._owners[i]
        self._rebuild_blocks()

    def _merge_block(self, start: float, end: float) -> None:
        bs, be = self._block_starts, self._block_ends
        i = bisect.bisect_left(bs, start)
        if i > 0 and be[i - 1] == start:
            i -= 1
            be[i] = end
        else:
            bs.insert(i, start)
            be.insert(i, end)
        if i + 1 < len(bs) and bs[i + 1] == be[i]:
            be[i] = be[i + 1]
            del bs[i + 1], be[i + 1]

    def _rebuild_blocks(self) -> None:
        self._block_starts, self._block_ends = [], []
        for s, e in zip(self._starts, self._ends):
            if self._block_ends and self._block_ends[-1] == s:
                self._block_ends[-1] = e
            else:
                self._block_starts.append(s)
                self._block_ends.append(e)


def solve_duration(schedule: CapacitySchedule, demand: float, earliest_start_s: float
                   ) -> tuple[float, float]:
    """Earliest (start, finish) for ``demand`` units served at full capacity."""
    if demand <= 0:
        raise ValueError("demand must be positive")
    duration = demand / schedule.capacity
    start = schedule.earliest_start(duration, earliest_start_s)
    return start, start + duration


class ResourceLedger:
    """All schedules of one simulation, keyed by resource tuples.

    Keys are ``("compute", zone)``, ``("isl", a, b)`` (directed),
    ``("sgl", vn_zone, dest_zone)`` and ``("uplink", src_zone, vn_zone)``.
    Schedules are created on first use. ``busy_until`` and ``tail_start``
    mirror every schedule's last busy block in numpy arrays so idle resources,
    and requests landing inside that last block, can be handled in bulk.
    """

    MAX_SLOTS = 16

    def __init__(self, zones: Iterable, isl_pairs: Iterable, *, sat_gflops: float = 100.0,
                 isl_gbps: float = 5.0, sgl_gbps: float = 0.2, uplink_gbps: float = 5.0):
        self.zones = frozenset(zones)
        pairs = set()
        for a, b in isl_pairs:
            pairs.add((a, b))
            pairs.add((b, a))
        self.isl_pairs = frozenset(pairs)
        self.capacity = {"compute": float(sat_gflops), "isl": float(isl_gbps) * 1e9,
                         "sgl": float(sgl_gbps) * 1e9, "uplink": float(uplink_gbps) * 1e9}
        for kind, cap in self.capacity.items():
            if cap <= 0:
                raise ValueError(f"{kind} capacity must be positive")
        self._index: dict[ResourceKey, int] = {}
        self._schedules: list[CapacitySchedule] = []
        self.busy_until = np.full(64, -np.inf)
        self.tail_start = np.full(64, -np.inf)
        # memo of placements per (resource, duration slot). With answer s found
        # from t0 and the next block at nb, any later t gets max(t, s) as long
        # as t <= s or t + duration <= nb, until the schedule changes.
        self._slots: dict[float, int] = {}
        self._memo_t0 = np.full((64, self.MAX_SLOTS), np.inf)
        self._memo_s = np.full((64, self.MAX_SLOTS), -np.inf)
        self._memo_nb = np.full((64, self.MAX_SLOTS), -np.inf)

    def validate(self, key: ResourceKey) -> None:
        kind = key[0]
        if kind == "compute":
            ok = len(key) == 2 and key[1] in self.zones
        elif kind == "isl":
            ok = len(key) == 3 and (key[1], key[2]) in self.isl_pairs
        elif kind == "sgl":
            ok = len(key) == 3 and key[1] in self.zones
        elif kind == "uplink":
            ok = len(key) == 3 and key[2] in self.zones
        else:
            ok = False
        if not ok:
            raise ResourceError(f"unknown resource {key!r}")

    def index(self, key: ResourceKey) -> int:
        i = self._index.get(key)
        if i is None:
            self.validate(key)
            i = len(self._schedules)
            self._index[key] = i
            self._schedules.append(CapacitySchedule(self.capacity[key[0]]))
            if i >= len(self.busy_until):
                size = 2 * len(self.busy_until)
                for name in ("busy_until", "tail_start"):
                    grown = np.full(size, -np.inf)
                    grown[:i] = getattr(self, name)[:i]
                    setattr(self, name, grown)
                for name, fill in (("_memo_t0", np.inf), ("_memo_s", -np.inf),
                                   ("_memo_nb", -np.inf)):
                    grown = np.full((size, self.MAX_SLOTS), fill)
                    grown[:i] = getattr(self, name)[:i]
                    setattr(self, name, grown)
        return i

    def schedule(self, key: ResourceKey) -> CapacitySchedule:
        return self._schedules[self.index(key)]

    def schedule_at(self, index: int) -> CapacitySchedule:
        return self._schedules[index]

    def keys(self) -> list[ResourceKey]:
        return list(self._index)

    def _changed(self, i: int, sched: CapacitySchedule) -> None:
        self.busy_until[i] = sched.busy_until
        self.tail_start[i] = sched.last_block_start
        self._memo_t0[i] = np.inf
        self._memo_s[i] = -np.inf
        self._memo_nb[i] = -np.inf

    def commit(self, reservation: Reservation) -> "ResourceLedger":
        i = self.index(reservation.resource)
        sched = self._schedules[i]
        sched.add(reservation.start_s, reservation.end_s, reservation.owner)
        self._changed(i, sched)
        return self

    def release(self, reservation: Reservation) -> "ResourceLedger":
        i = self._index.get(reservation.resource)
        if i is None:
            raise ResourceError(f"unknown resource {reservation.resource!r}")
        sched = self._schedules[i]
        sched.remove(reservation.start_s, reservation.end_s, reservation.owner)
        self._changed(i, sched)
        return self

    def _slot(self, duration: float) -> int:
        k = self._slots.get(duration)
        if k is None:
            if len(self._slots) >= self.MAX_SLOTS:
                return -1
            k = self._slots[duration] = len(self._slots)
        return k

    def earliest_starts(self, res_idx: np.ndarray, durations: np.ndarray, t: float) -> np.ndarray:
        """Vectorised ``schedule.earliest_start(duration, t)`` for many requests."""
        start = np.full(len(res_idx), float(t))
        until = self.busy_until[res_idx]
        busy = until > t
        # t inside the last busy block: the only fitting gap opens at its end
        tail = busy & (self.tail_start[res_idx] <= t)
        start[tail] = until[tail]
        rest = np.nonzero(busy & ~tail)[0]
        if not len(rest):
            return start
        dur = durations[rest]
        uniq, inv = np.unique(dur, return_inverse=True)
        slots = np.array([self._slot(float(d)) for d in uniq], dtype=np.int64)[inv]
        r = res_idx[rest]
        cached = slots >= 0
        cs = np.where(cached, slots, 0)
        t0 = np.where(cached, self._memo_t0[r, cs], np.inf)
        s = self._memo_s[r, cs]
        nb = self._memo_nb[r, cs]
        hit = (t0 <= t) & ((t <= s) | (t + dur <= nb))
        start[rest[hit]] = np.maximum(s[hit], t)
        for j in np.nonzero(~hit)[0].tolist():
            i = int(r[j])
            value, nxt = self._schedules[i].placement(float(dur[j]), t)
            start[rest[j]] = value
            if cached[j]:
                self._memo_t0[i, slots[j]] = t
                self._memo_s[i, slots[j]] = value
                self._memo_nb[i, slots[j]] = nxt
        return start

    def state(self) -> dict[ResourceKey, list[tuple[float, float]]]:
        """Comparable dump of every non-empty schedule."""
        return {k: self._schedules[i].intervals for k, i in self._index.items()
                if len(self._schedules[i])}


def _solve(ledger: ResourceLedger, key: ResourceKey, demand: float, earliest_start_s: float,
           owner: Hashable) -> tuple[float, Reservation]:
    sched = ledger.schedule(key)
    if demand <= 0:
        raise ValueError("demand must be positive")
    duration = demand / sched.capacity
    start = sched.earliest_start(duration, earliest_start_s)
    # waiting + service, summed in this order everywhere delays are reported
    delay = (start - earliest_start_s) + duration
    return delay, Reservation(key, start, start + duration, owner)


def transmission_delay(ledger: ResourceLedger, edge: ResourceKey, volume_bits: float,
                       earliest_start_s: float, owner: Hashable = None
                       ) -> tuple[float, Reservation]:
    """Waiting plus serialisation delay on a link; the reservation is not committed."""
    if edge[0] not in ("isl", "sgl", "uplink"):
        raise ResourceError(f"{edge!r} is not a link")
    return _solve(ledger, edge, volume_bits, earliest_start_s, owner)


def computation_delay(ledger: ResourceLedger, node, flop_g: float, earliest_start_s: float,
                      owner: Hashable = None) -> tuple[float, Reservation | None]:
    """Waiting plus processing delay on a VN. Ground servers cost nothing."""
    if node == GROUND:
        return 0.0, None
    return _solve(ledger, ("compute", node), flop_g, earliest_start_s, owner)


def propagation_delay(distance_m: float, light_speed_m_s: float = 299_792_458.0) -> float:
    if distance_m < 0:
        raise ValueError("distance must be non-negative")
    return distance_m / light_speed_m_s


def commit(ledger: ResourceLedger, reservation: Reservation) -> ResourceLedger:
    return ledger.commit(reservation)


def release(ledger: ResourceLedger, reservation: Reservation) -> ResourceLedger:
    return ledger.release(reservation)
