"""Run the three offloading schemes on one hotspot workload and compare them.

Usage: python3 demos/compare_schemes.py [load] [seed]
"""
import sys

from leofusion import Classification, ScenarioConfig, run_simulation
from leofusion import metrics

load = float(sys.argv[1]) if len(sys.argv) > 1 else 100.0
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0

runs = {s: run_simulation(ScenarioConfig(scheme=s, load=load), seed=seed)
        for s in ("fusion", "ground", "visible")}

print(f"load={load:g} tasks/s, seed={seed}, {runs['fusion'].num_tasks} tasks per scheme\n")
print(f"{'scheme':<8} {'WAD (s)':>9} {'success':>8} {'ground':>7} {'visible':>8} {'invisible':>10}")
for scheme, res in runs.items():
    shares = metrics.classification_shares(res)
    print(f"{scheme:<8} {metrics.weighted_average_delay(res):9.3f} {metrics.success_rate(res):8.3f}"
          f" {shares[Classification.GROUND]:7.1%} {shares[Classification.VISIBLE]:8.1%}"
          f" {shares[Classification.INVISIBLE]:10.1%}")

# Where does the time go for the tasks fusion pushed onto satellites the
# user cannot see?
ids = metrics.invisible_task_ids(runs["fusion"])
print(f"\nper-task delay components over the {len(ids)} tasks fusion sent to invisible satellites")
print(f"{'scheme':<8}" + "".join(f"{c:>18}" for c in metrics.COMPONENTS))
for scheme, res in runs.items():
    b = metrics.delay_breakdown(res, ids)
    print(f"{scheme:<8}" + "".join(f"{b[c]:18.4f}" for c in metrics.COMPONENTS))
