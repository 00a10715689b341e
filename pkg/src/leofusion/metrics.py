"""Weighted average delay, per-component delay breakdown and target distribution."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .engine import Classification, SimulationResult, TaskRecord
from .orbital import ZoneId

COMPONENTS = ("sgl_transmission", "isl_transmission", "propagation", "computation", "waiting")


class MetricsError(ValueError):
    pass


def _records(results) -> list[TaskRecord]:
    if isinstance(results, SimulationResult):
        return results.records
    return list(results)


def weighted_average_delay(results: SimulationResult | Iterable[TaskRecord],
                           threshold_s: float | None = None) -> float:
    """Mean task delay, failed tasks counted at the threshold.

    ``threshold_s`` overrides each task's own threshold when given.
    """
    records = _records(results)
    if not records:
        raise MetricsError("weighted average delay of an empty result set")
    total = 0.0
    for r in records:
        theta = r.task.threshold_s if threshold_s is None else threshold_s
        total += r.delay_s if r.success else theta
    return total / len(records)


def success_rate(results) -> float:
    records = _records(results)
    if not records:
        raise MetricsError("success rate of an empty result set")
    return sum(r.success for r in records) / len(records)


def delay_breakdown(results, task_ids: Iterable[int] | None = None) -> dict[str, float]:
    """Per-component mean over successful subtasks.

    ``task_ids`` restricts the average to those tasks, e.g. the ones for
    which the fusion scheme picked an invisible target, so that schemes are
    compared on the same tasks. Components are zero when nothing qualifies.
    """
    keep = None if task_ids is None else set(task_ids)
    sums = dict.fromkeys(COMPONENTS, 0.0)
    n = 0
    for r in _records(results):
        if not r.success or (keep is not None and r.task.id not in keep):
            continue
        for d in r.decisions:
            for name, value in d.components.as_dict().items():
                sums[name] += value
            n += 1
    return {k: (v / n if n else 0.0) for k, v in sums.items()}


def invisible_task_ids(results) -> list[int]:
    """Tasks with at least one subtask computed on an invisible satellite."""
    return [r.task.id for r in _records(results) if r.success
            and any(d.classification is Classification.INVISIBLE for d in r.decisions)]


def target_zone(decision, record: TaskRecord) -> ZoneId:
    """Where a subtask was computed: its virtual-edge zone, or the destination."""
    if decision.compute_zone is None:
        return record.task.dest_zone
    return decision.compute_zone


def target_distribution(results, source_zone: ZoneId | None = None
                        ) -> Counter[tuple[ZoneId, Classification]]:
    """Counts of (target zone, classification) over committed subtasks."""
    out: Counter = Counter()
    for r in _records(results):
        if source_zone is not None and r.task.source_zone != source_zone:
            continue
        for d in r.decisions:
            out[(target_zone(d, r), d.classification)] += 1
    return out


def classification_shares(results, source_zone: ZoneId | None = None
                          ) -> dict[Classification, float]:
    counts = Counter()
    for (_, cls), n in target_distribution(results, source_zone).items():
        counts[cls] += n
    total = sum(counts.values())
    return {c: (counts[c] / total if total else 0.0) for c in Classification}


@dataclass(frozen=True)
class MetricsReport:
    weighted_average_delay_s: float
    success_rate: float
    breakdown: dict[str, float] = field(default_factory=dict)
    target_distribution: dict[tuple[ZoneId, Classification], int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.success_rate <= 1.0:
            raise MetricsError("success rate outside [0, 1]")
        if any(v < 0 for v in self.breakdown.values()):
            raise MetricsError("negative delay component")


def report(results, task_ids: Sequence[int] | None = None) -> MetricsReport:
    return MetricsReport(weighted_average_delay(results), success_rate(results),
                         delay_breakdown(results, task_ids), dict(target_distribution(results)))
