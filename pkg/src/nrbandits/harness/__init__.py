from __future__ import annotations

from .config import PlayerSpec, ScenarioConfig, load_config, parse_seeds, parse_strategy
from .presets import COMPARISONS, berts_config, preset
from .run import RunError, RunTrace, run, run_batch

__all__ = [
    "PlayerSpec", "ScenarioConfig", "load_config", "parse_seeds", "parse_strategy", "preset",
    "berts_config", "COMPARISONS", "run", "run_batch", "RunTrace", "RunError",
]
