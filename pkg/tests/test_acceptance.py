"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``. The scenario criteria (5-9) share
memoised simulations, so running the whole module costs about as much as
the load sweep plus the two capacity sweeps.
"""
from __future__ import annotations

import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from leofusion import metrics, oracle
from leofusion.cli import main as cli_main
from leofusion.config import ScenarioConfig
from leofusion.engine import Classification, run_simulation
from leofusion.orbital import ConstellationSpec, ZoneId, orbital_period
from leofusion.resources import ResourceLedger, computation_delay, transmission_delay

SCHEMES = ("fusion", "ground", "visible")
SEEDS = (0, 1, 2, 3, 4)
LOADS = (50.0, 100.0, 200.0, 300.0)
CAPACITY_SEEDS = (0, 1, 2)
GFLOPS = (50.0, 100.0, 200.0, 500.0)
SGL = (0.2, 1.0, 5.0, 10.0)


@pytest.fixture
def emit(capsys):
    """Print a criterion line straight to the terminal, bypassing capture."""
    def _emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return _emit


@lru_cache(maxsize=None)
def simulate(scheme: str, seed: int, **changes):
    return run_simulation(ScenarioConfig(scheme=scheme, **changes), seed=seed)


def wad(scheme: str, seed: int, **changes) -> float:
    return metrics.weighted_average_delay(simulate(scheme, seed, **changes))


def mean_wad(scheme: str, seeds, **changes) -> float:
    return float(np.mean([wad(scheme, s, **changes) for s in seeds]))


def test_criterion_01_dominance_oracle(emit):
    t0 = time.perf_counter()
    reports = oracle.dominance_suite(200, seed=0)
    elapsed = time.perf_counter() - t0
    bad = [r for r in reports if not r.ok]
    skipped = sum(r.instance.endswith("-skipped") for r in reports)
    ok = not bad and elapsed < 60.0
    emit(1, ok, f"dominance on 200 instances: violations={len(bad)} skipped={skipped} "
                f"runtime={elapsed:.1f}s (<60s)")
    assert not bad
    assert elapsed < 60.0


def test_criterion_02_shortest_path_oracle(emit):
    t0 = time.perf_counter()
    reports = oracle.shortest_path_suite(500, seed=0)
    elapsed = time.perf_counter() - t0
    bad = [r for r in reports if not r.ok]
    ok = not bad and elapsed < 60.0
    emit(2, ok, f"engine vs enumeration on 500 metagraphs: mismatches={len(bad)} "
                f"(tol 1e-9, identical paths) runtime={elapsed:.1f}s (<60s)")
    assert not bad
    assert elapsed < 60.0


def test_criterion_03_delay_closed_forms(emit):
    a, b = ZoneId(0, 0), ZoneId(0, 1)
    led = ResourceLedger([a, b], [(a, b)], sat_gflops=100.0, isl_gbps=5.0, sgl_gbps=0.2)
    bits = 0.1 * 8e9
    isl = transmission_delay(led, ("isl", a, b), bits, 0.0)[0]
    sgl = transmission_delay(led, ("sgl", a, b), bits, 0.0)[0]
    comp = computation_delay(led, a, 100.0, 0.0)[0]
    errs = [abs(isl - 0.16), abs(sgl - 4.0), abs(comp - 1.0)]
    ok = max(errs) <= 1e-9
    emit(3, ok, f"isl={isl!r} sgl={sgl!r} comp={comp!r} max_err={max(errs):.1e} (<=1e-9)")
    assert ok


def test_criterion_04_orbital_period(emit):
    spec = ConstellationSpec()
    independent = 2.0 * math.pi * math.sqrt((6_371_393.0 + 500e3) ** 3 / 3.9860e14)
    period = orbital_period(spec)
    ok = abs(period - 5668.9) <= 0.5 and abs(period - independent) <= 1e-9
    emit(4, ok, f"period={period:.3f}s target 5668.9+-0.5 (independent {independent:.3f}s)")
    assert ok


def test_criterion_05_load_trend(emit):
    slowest = 0.0
    table = {}
    for load in LOADS:
        t0 = time.perf_counter()
        table[load] = {s: mean_wad(s, SEEDS, load=load) for s in SCHEMES}
        slowest = max(slowest, time.perf_counter() - t0)
    order_ok = all(row["fusion"] <= 1.01 * row["visible"] and row["fusion"] <= 1.01 * row["ground"]
                   for row in table.values())
    top = table[300.0]
    vs_ground = 1.0 - top["fusion"] / top["ground"]
    vs_visible = 1.0 - top["fusion"] / top["visible"]
    ok = order_ok and vs_ground >= 0.5 and vs_visible >= 0.05 and slowest < 300.0
    cells = " ".join(f"L={int(k)}:f={v['fusion']:.2f}/v={v['visible']:.2f}/g={v['ground']:.2f}"
                     for k, v in table.items())
    emit(5, ok, f"{cells}; at L=300 fusion -{vs_ground:.1%} vs ground (>=50%), "
                f"-{vs_visible:.1%} vs visible (>=5%); slowest point {slowest:.0f}s (<300s)")
    assert order_ok
    assert vs_ground >= 0.5 and vs_visible >= 0.05
    assert slowest < 300.0


def _sweep(param, values):
    seeds = CAPACITY_SEEDS
    return {s: [mean_wad(s, seeds, load=200.0, **{param: v}) for v in values] for s in SCHEMES}


def test_criterion_06_compute_capacity_trend(emit):
    curves = _sweep("sat_gflops", GFLOPS)
    g, f, v = curves["ground"], curves["fusion"], curves["visible"]
    ground_flat = max(abs(x - g[0]) for x in g) <= 1e-3 * g[0]
    fusion_down = all(b <= a for a, b in zip(f, f[1:]))
    gap_shrinks = abs(f[-1] - v[-1]) < abs(f[0] - v[0])
    ok = ground_flat and fusion_down and gap_shrinks
    emit(6, ok, f"ground={[round(x, 3) for x in g]} (flat +-0.1%: {ground_flat}) "
                f"fusion={[round(x, 3) for x in f]} (non-increasing: {fusion_down}) "
                f"|f-v| {abs(f[0] - v[0]):.3f} -> {abs(f[-1] - v[-1]):.3f}")
    assert ground_flat and fusion_down and gap_shrinks


def test_criterion_07_sgl_rate_trend(emit):
    curves = _sweep("sgl_gbps", SGL)
    g, f, v = curves["ground"], curves["fusion"], curves["visible"]
    visible_flat = max(abs(x - v[0]) for x in v) <= 1e-2 * v[0]
    ground_down = all(b <= a for a, b in zip(g, g[1:]))
    fusion_le_ground = all(a <= b for a, b in zip(f, g))
    ok = visible_flat and ground_down and fusion_le_ground
    emit(7, ok, f"visible={[round(x, 3) for x in v]} (flat +-1%: {visible_flat}) "
                f"ground={[round(x, 3) for x in g]} (non-increasing: {ground_down}) "
                f"fusion={[round(x, 3) for x in f]} (<= ground: {fusion_le_ground})")
    assert visible_flat and ground_down and fusion_le_ground


def _pooled_breakdown(task_ids_for=None):
    pooled = {s: {k: [] for k in metrics.COMPONENTS} for s in SCHEMES}
    for seed in SEEDS:
        ids = task_ids_for(seed) if task_ids_for else None
        for s in SCHEMES:
            b = metrics.delay_breakdown(simulate(s, seed, load=200.0), ids)
            for k, val in b.items():
                pooled[s][k].append(val)
    return {s: {k: float(np.mean(v)) for k, v in comp.items()} for s, comp in pooled.items()}


def test_criterion_08_delay_breakdown(emit):
    mean = _pooled_breakdown()
    sgl = {s: mean[s]["sgl_transmission"] for s in SCHEMES}
    cw = {s: mean[s]["computation"] + mean[s]["waiting"] for s in SCHEMES}
    # same comparison restricted to tasks fusion computed on invisible satellites
    sub = _pooled_breakdown(lambda seed: metrics.invisible_task_ids(simulate("fusion", seed, load=200.0)))
    sub_cw = {s: sub[s]["computation"] + sub[s]["waiting"] for s in SCHEMES}
    ok = sgl["ground"] > sgl["fusion"] and sgl["ground"] > sgl["visible"] \
        and cw["visible"] > cw["fusion"]
    emit(8, ok, "L=200 mean SGL " + " ".join(f"{s}={v:.4f}" for s, v in sgl.items())
         + "; comp+wait " + " ".join(f"{s}={v:.3f}" for s, v in cw.items())
         + " | fusion-invisible tasks: SGL " + " ".join(f"{s}={sub[s]['sgl_transmission']:.4f}" for s in SCHEMES)
         + " comp+wait " + " ".join(f"{s}={v:.3f}" for s, v in sub_cw.items()))
    assert sgl["ground"] > sgl["fusion"] and sgl["ground"] > sgl["visible"]
    assert cw["visible"] > cw["fusion"]


def test_criterion_09_target_distribution(emit):
    overall, hot = {}, {}
    for s in ("fusion", "visible"):
        res = simulate(s, 0, load=200.0)
        overall[s] = metrics.classification_shares(res)[Classification.INVISIBLE]
        hot[s] = metrics.classification_shares(res, source_zone=res.hotspots[0])[Classification.INVISIBLE]
    ok = overall["fusion"] > 0.0 and overall["visible"] == 0.0
    emit(9, ok, f"invisible share: fusion={overall['fusion']:.3f} (>0) visible={overall['visible']:.3f} (==0)"
                f"; from the hottest zone fusion={hot['fusion']:.3f} visible={hot['visible']:.3f}")
    assert overall["fusion"] > 0.0
    assert overall["visible"] == 0.0


def test_criterion_10_determinism(tmp_path, emit):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert cli_main(["run", "--seed", "7", "--out", str(out)]) == 0
        outs.append((out / "tasks_fusion_seed7.csv").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    emit(10, ok, f"two runs, same config and seed: identical={outs[0] == outs[1]} "
                 f"({len(outs[0])} bytes)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
