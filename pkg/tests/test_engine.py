import pytest
from hypothesis import given, settings, strategies as st

from leofusion.config import ScenarioConfig
from leofusion.engine import (Classification, Scenario, classify_path, dijkstra, frozen_lengths,
                              make_tasks, offload_task, path_length, run_simulation, shortest_path)
from leofusion.metagraph import DEST, SOURCE, Tier, vn
from leofusion.oracle import brute_force_shortest_path
from leofusion.orbital import ZoneId
from leofusion.traffic import Subtask, Task

SUB = Subtask(100.0, 0.1)


def test_two_hop_beats_direct():
    w = {("a", "b"): 3.0, ("a", "c"): 1.0, ("c", "b"): 1.0}
    assert shortest_path(w, "a", "b") == (["a", "c", "b"], 2.0)


def test_same_endpoint_and_unreachable():
    w = {("a", "b"): 1.0}
    assert shortest_path(w, "a", "a") == ([], 0.0)
    assert shortest_path(w, "b", "a") is None


def test_tie_goes_to_smallest_node_sequence():
    w = {(0, 2): 1.0, (2, 3): 1.0, (0, 1): 1.0, (1, 3): 1.0}
    assert shortest_path(w, 0, 3) == ([0, 1, 3], 2.0)
    # 0-1-2-4, 0-1-3-4 and 0-2-4 all have length 3
    w = {(0, 1): 1.0, (1, 2): 1.0, (1, 3): 1.0, (2, 4): 1.0, (3, 4): 1.0, (0, 2): 2.0}
    assert shortest_path(w, 0, 4) == ([0, 1, 2, 4], 3.0)


def test_integer_dijkstra_interface():
    adj = [[(1, 0), (2, 1)], [(2, 2)], []]
    assert dijkstra(adj, [5.0, 9.0, 1.0], 0, 2) == ([0, 1, 2], 6.0)


graphs = st.dictionaries(st.tuples(st.integers(0, 7), st.integers(0, 7)).filter(lambda e: e[0] != e[1]),
                         st.one_of(st.integers(1, 3).map(float), st.floats(0.01, 10.0)),
                         max_size=30)


@settings(max_examples=300, deadline=None)
@given(graphs)
def test_matches_brute_force(w):
    found = shortest_path(w, 0, 7)
    oracle = brute_force_shortest_path(w, 0, 7)
    assert found == oracle
    if found:
        assert found[1] == pytest.approx(path_length(w, found[0]), abs=1e-12)


def _paths():
    g, h, j, k, l, n, o, p = (ZoneId(0, i) for i in range(8))
    path1 = [SOURCE, vn(g), vn(h), vn(l), DEST]
    path2 = [SOURCE, vn(k), vn(k, Tier.COMPUTED), vn(l, Tier.COMPUTED), DEST]
    path3 = [SOURCE, vn(j), vn(n), vn(n, Tier.COMPUTED), vn(o, Tier.COMPUTED),
             vn(p, Tier.COMPUTED), DEST]
    return {g, j, k}, path1, path2, path3


def test_classification_examples():
    u_vis, p1, p2, p3 = _paths()
    assert classify_path(p1, u_vis) is Classification.GROUND
    assert classify_path(p2, u_vis) is Classification.VISIBLE
    assert classify_path(p3, u_vis) is Classification.INVISIBLE


def _task(threshold=300.0, t=3.0, src=ZoneId(4, 8), dst=ZoneId(2, 3), n=2):
    return Task(0, src, dst, n, t, threshold, (SUB,) * n)


@pytest.mark.parametrize("scheme", ["fusion", "ground", "visible"])
def test_offload_success(scheme):
    sc = Scenario(ScenarioConfig(scheme=scheme))
    rec = offload_task(_task(), scheme, sc)
    assert rec.success
    assert rec.delay_s == pytest.approx(max(d.completion_s for d in rec.decisions) - 3.0)
    for d in rec.decisions:
        assert d.components.total == pytest.approx(d.completion_s - 3.0, abs=1e-9)
        assert d.delay_s <= rec.delay_s + 1e-12
        assert d.length_s <= d.delay_s + 1e-9
        if scheme == "ground":
            assert d.classification is Classification.GROUND
            assert d.components.computation == 0.0
    held = sc.ledger.state()
    assert sum(len(v) for v in held.values()) == sum(len(d.reservations) for d in rec.decisions)


def test_siblings_may_differ_but_never_overlap():
    sc = Scenario(ScenarioConfig())
    for i in range(20):
        offload_task(Task(i, ZoneId(4, 8), ZoneId(4, 9), 2, 0.01 * i, 300.0, (SUB, SUB)),
                     "fusion", sc)
    for intervals in sc.ledger.state().values():
        for (a0, a1), (b0, b1) in zip(intervals, intervals[1:]):
            assert a1 <= b0


def test_threshold_failure_records_threshold():
    sc = Scenario(ScenarioConfig())
    rec = offload_task(_task(threshold=0.5), "fusion", sc)
    assert not rec.success and rec.delay_s == 0.5 and rec.decisions == []
    assert sc.ledger.state() == {}


def test_failed_sibling_rolls_back_first_subtask():
    probe = Scenario(ScenarioConfig())
    # preload so the two subtasks of the task finish at different times
    for i in range(30):
        offload_task(Task(100 + i, ZoneId(4, 8), ZoneId(2, 3), 1, 0.0, 300.0, (SUB,)), "visible",
                     probe)
    rec = offload_task(_task(t=0.5), "visible", probe)
    c0, c1 = (d.completion_s - 0.5 for d in rec.decisions)
    assert c0 < c1
    sc = Scenario(ScenarioConfig())
    for i in range(30):
        offload_task(Task(100 + i, ZoneId(4, 8), ZoneId(2, 3), 1, 0.0, 300.0, (SUB,)), "visible", sc)
    before = sc.ledger.state()
    failed = offload_task(_task(threshold=(c0 + c1) / 2, t=0.5), "visible", sc)
    assert not failed.success and failed.delay_s == (c0 + c1) / 2
    assert sc.ledger.state() == before


def test_zero_load():
    res = run_simulation(ScenarioConfig(load=0.0))
    assert res.records == [] and res.num_tasks == 0


def test_run_is_deterministic_and_ordered():
    cfg = ScenarioConfig(load=30.0, duration_s=2.0)
    a, b = run_simulation(cfg, seed=4), run_simulation(cfg, seed=4)
    assert [(r.task, r.delay_s, r.success) for r in a.records] == \
        [(r.task, r.delay_s, r.success) for r in b.records]
    times = [(r.task.gen_time_s, r.task.id) for r in a.records]
    assert times == sorted(times)


def test_workload_is_shared_across_schemes():
    cfg = ScenarioConfig(load=30.0, duration_s=2.0)
    tasks = {s: make_tasks(cfg.replace(scheme=s, sat_gflops=50.0 * (i + 1)), 9)[0]
             for i, s in enumerate(["fusion", "ground", "visible"])}
    assert tasks["fusion"] == tasks["ground"] == tasks["visible"]


def test_dominance_on_loaded_ledger():
    """Fusion is never longer than the benchmarks on the same ledger view."""
    cfg = ScenarioConfig(load=100.0, duration_s=2.0)
    sc = Scenario(cfg)
    tasks, _ = make_tasks(cfg, 1)
    for task in tasks:
        lengths = frozen_lengths(task, sc)
        assert lengths["fusion"] <= lengths["ground"]
        assert lengths["fusion"] <= lengths["visible"]
        rec = offload_task(task, "fusion", sc)
        for d in rec.decisions:
            assert d.classification in Classification
