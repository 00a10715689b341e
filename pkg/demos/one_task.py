"""Offload a single two-subtask job and print the path each scheme picks."""
from leofusion import ScenarioConfig, ZoneId, offload_task
from leofusion.engine import Scenario
from leofusion.traffic import Subtask, Task

job = Task(0, ZoneId(4, 8), ZoneId(2, 3), 2, 0.0, 300.0, (Subtask(100.0, 0.1),) * 2)

for scheme in ("fusion", "ground", "visible"):
    rec = offload_task(job, scheme, Scenario(ScenarioConfig(scheme=scheme)))
    print(f"{scheme}: delay {rec.delay_s:.3f} s")
    for d in rec.decisions:
        hops = " -> ".join(str(n) for n in d.path)
        print(f"  subtask {d.subtask} [{d.classification.value}] {d.delay_s:.3f} s: {hops}")
