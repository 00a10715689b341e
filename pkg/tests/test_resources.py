import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leofusion.orbital import ZoneId
from leofusion.resources import (GROUND, CapacitySchedule, Reservation, ResourceError,
                                 ResourceLedger, commit, computation_delay, propagation_delay,
                                 release, solve_duration, transmission_delay)

A, B, C = ZoneId(0, 0), ZoneId(0, 1), ZoneId(1, 1)


@pytest.fixture
def ledger():
    return ResourceLedger([A, B, C], [(A, B), (B, C)])


def test_solve_duration_free_and_busy():
    s = CapacitySchedule(5e9)
    assert solve_duration(s, 0.8e9, 0.0) == pytest.approx((0.0, 0.16), abs=1e-12)
    s.add(0.0, 2.0)
    assert solve_duration(s, 0.8e9, 0.0) == pytest.approx((2.0, 2.16), abs=1e-12)
    assert solve_duration(CapacitySchedule(100.0), 100.0, 0.0) == (0.0, 1.0)


def test_earliest_gap_placement():
    s = CapacitySchedule(1.0)
    s.add(0.0, 1.0)
    s.add(1.5, 3.0)
    s.add(3.0, 4.0)
    assert s.earliest_start(0.5, 0.0) == 1.0
    assert s.earliest_start(0.6, 0.0) == 4.0
    assert s.earliest_start(0.2, 1.2) == 1.2
    assert s.earliest_start(0.2, 3.5) == 4.0
    assert s.busy_until == 4.0
    assert s.last_block_start == 1.5


@pytest.mark.parametrize("demand", [0.0, -1.0])
def test_nonpositive_demand(demand):
    with pytest.raises(ValueError):
        solve_duration(CapacitySchedule(1.0), demand, 0.0)


@pytest.mark.parametrize("vol, key, expected", [
    (0.8e9, ("sgl", A, B), 4.0),
    (0.8e9, ("isl", A, B), 0.16),
    (1e6, ("isl", B, A), 2e-4),
    (0.8e9, ("uplink", C, A), 0.16),
])
def test_transmission_closed_forms(ledger, vol, key, expected):
    delay, res = transmission_delay(ledger, key, vol, 0.0)
    assert delay == pytest.approx(expected, abs=1e-9)
    assert res.end_s - res.start_s == pytest.approx(expected, abs=1e-9)


def test_computation_delay(ledger):
    assert computation_delay(ledger, A, 100.0, 0.0)[0] == pytest.approx(1.0, abs=1e-9)
    assert computation_delay(ledger, GROUND, 100.0, 0.0) == (0.0, None)
    commit(ledger, Reservation(("compute", A), 0.0, 3.0))
    assert computation_delay(ledger, A, 100.0, 0.0)[0] == pytest.approx(4.0, abs=1e-9)


def test_transmission_rejects_compute_key(ledger):
    with pytest.raises(ResourceError):
        transmission_delay(ledger, ("compute", A), 1.0, 0.0)


@pytest.mark.parametrize("key", [("isl", A, C), ("compute", ZoneId(5, 5)), ("warp", A),
                                 ("sgl", ZoneId(9, 9), A), ("uplink", A, ZoneId(9, 9))])
def test_unknown_resources(ledger, key):
    with pytest.raises(ResourceError):
        ledger.schedule(key)


@pytest.mark.parametrize("d, expected", [(0.0, 0.0), (1e6, 3.3356e-3), (9.7177e6, 0.032415)])
def test_propagation(d, expected):
    assert propagation_delay(d) == pytest.approx(expected, abs=1e-6)


def test_propagation_negative():
    with pytest.raises(ValueError):
        propagation_delay(-1.0)


def test_commit_then_next_gap(ledger):
    commit(ledger, Reservation(("isl", A, B), 0.0, 0.16))
    assert ledger.schedule(("isl", A, B)).earliest_start(0.1, 0.0) == 0.16
    # the reverse direction is an independent resource
    assert ledger.schedule(("isl", B, A)).earliest_start(0.1, 0.0) == 0.0


def test_double_commit_rejected(ledger):
    r = Reservation(("isl", A, B), 0.0, 0.16)
    commit(ledger, r)
    with pytest.raises(ResourceError):
        commit(ledger, Reservation(("isl", A, B), 0.1, 0.2))


def test_commit_release_roundtrip(ledger):
    commit(ledger, Reservation(("compute", B), 5.0, 6.0, "x"))
    before = ledger.state()
    r = Reservation(("compute", B), 1.0, 2.0, "y")
    release(commit(ledger, r), r)
    assert ledger.state() == before
    with pytest.raises(ResourceError):
        release(ledger, r)


def test_release_checks_owner(ledger):
    commit(ledger, Reservation(("compute", B), 1.0, 2.0, "x"))
    with pytest.raises(ResourceError):
        release(ledger, Reservation(("compute", B), 1.0, 2.0, "y"))


def test_empty_reservation_rejected():
    with pytest.raises(ValueError):
        Reservation(("compute", A), 1.0, 1.0)


def test_ledger_arrays_grow(ledger):
    zones = [ZoneId(r, c) for r in range(8) for c in range(16)]
    big = ResourceLedger(zones, [])
    for i, z in enumerate(zones):
        big.commit(Reservation(("compute", z), float(i), float(i) + 1.0))
    assert big.busy_until[big.index(("compute", zones[-1]))] == 128.0
    assert len(big.keys()) == 128


intervals = st.lists(st.tuples(st.floats(0, 50), st.floats(0.01, 5)), max_size=12)


@settings(max_examples=150, deadline=None)
@given(intervals, st.lists(st.tuples(st.floats(0, 60), st.sampled_from([0.05, 0.5, 2.0])),
                           min_size=1, max_size=20))
def test_vectorised_placement_matches_scalar(busy, queries):
    """The memoised bulk query agrees exactly with the per-schedule gap search."""
    led = ResourceLedger([A, B], [(A, B)])
    keys = [("compute", A), ("compute", B), ("isl", A, B)]
    rng = np.random.default_rng(len(busy))
    for k, (start, length) in enumerate(busy):
        key = keys[k % 3]
        s = led.schedule(key).earliest_start(length, start)
        led.commit(Reservation(key, s, s + length, k))
    idx = np.array([led.index(k) for k in keys])
    for t, d in sorted(queries):
        durations = np.full(3, d)
        got = led.earliest_starts(idx, durations, t)
        want = [led.schedule(k).earliest_start(d, t) for k in keys]
        assert got.tolist() == want
        if rng.random() < 0.3:
            key = keys[int(rng.integers(3))]
            s = led.schedule(key).earliest_start(d, t)
            led.commit(Reservation(key, s, s + d, ("q", t)))


@settings(max_examples=100, deadline=None)
@given(intervals)
def test_no_overlaps_after_greedy_placement(busy):
    s = CapacitySchedule(1.0)
    for start, length in busy:
        at = s.earliest_start(length, start)
        assert at >= start
        s.add(at, at + length)
    iv = s.intervals
    for (a0, a1), (b0, b1) in zip(iv, iv[1:]):
        assert a1 <= b0
