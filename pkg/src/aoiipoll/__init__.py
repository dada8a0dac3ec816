"""Whittle-index polling of wireless sensor nodes under an Age of Incorrect Information cost."""

from .channel import LinkModel
from .engine import RunResult, RunSummary, SimConfig, StepLog, run, run_replications
from .metrics import EnergyModel
from .policies import POLICIES, make_policy
from .whittle import WhittleConfig
from .world import (
    GroundTruth,
    ScenarioSpec,
    TraceSpec,
    ValidationError,
    generate_synthetic,
    load_trace,
    scenario_by_name,
)

__version__ = "0.1.0"

__all__ = [
    "EnergyModel", "GroundTruth", "LinkModel", "POLICIES", "RunResult", "RunSummary",
    "ScenarioSpec", "SimConfig", "StepLog", "TraceSpec", "ValidationError", "WhittleConfig",
    "generate_synthetic", "load_trace", "make_policy", "run", "run_replications",
    "scenario_by_name",
]
