"""LEO satellite task offloading over computation/transmission metagraphs."""
from .config import ConfigError, ScenarioConfig, parse_config
from .engine import (Classification, SimulationResult, TaskRecord, classify_path, offload_task,
                     run_simulation, shortest_path)
from .metagraph import SCHEMES, assign_weights, build
from .metrics import delay_breakdown, target_distribution, weighted_average_delay
from .orbital import ConstellationSpec, ZoneGrid, ZoneId, build_snapshot, orbital_period

__all__ = [
    "SCHEMES", "Classification", "ConfigError", "ConstellationSpec", "ScenarioConfig",
    "SimulationResult", "TaskRecord", "ZoneGrid", "ZoneId", "assign_weights", "build",
    "build_snapshot", "classify_path", "delay_breakdown", "offload_task", "orbital_period",
    "parse_config", "run_simulation", "shortest_path", "target_distribution",
    "weighted_average_delay",
]
