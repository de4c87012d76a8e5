"""Agent-based epidemic and economy simulator of a synthetic German town."""

from .config import ConfigError, TownConfig, default_config, load_config
from .engine import Simulation, StockFlowError
from .harness import run_monte_carlo, run_simulation, sweep
from .metrics import RunMetrics
from .policy import PolicySet, ScenarioSchedule, scenario_schedule
from .stats import summarize, welch_test
from .synth import Town, build_town

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "TownConfig", "default_config", "load_config",
    "Simulation", "StockFlowError", "run_simulation", "run_monte_carlo",
    "sweep", "RunMetrics", "PolicySet", "ScenarioSchedule",
    "scenario_schedule", "summarize", "welch_test", "Town", "build_town",
    "__version__",
]
