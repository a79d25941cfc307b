"""Cooperative circumnavigation simulation library."""

__version__ = "0.1.0"

from .geometry import Vec2, line_of_sight, wrap_angle
from .world import AgentState, ObstacleSegment, TargetState, World
from .config import ScenarioConfig, builtin, load_config, parse_config
from .runner import run_scenario
from .metrics import compare_estimators, compute_metrics

__all__ = [
    "Vec2",
    "line_of_sight",
    "wrap_angle",
    "AgentState",
    "TargetState",
    "ObstacleSegment",
    "World",
    "ScenarioConfig",
    "builtin",
    "load_config",
    "parse_config",
    "run_scenario",
    "compare_estimators",
    "compute_metrics",
    "__version__",
]
