"""The two reference scenarios: a 2-user / 2-channel game with printed gain
intervals, and a 5-user / 3-channel game whose intervals come from a fixture."""
from __future__ import annotations

from ..core import ConfigError
from .config import PlayerSpec, ScenarioConfig, load_fixture

# (channel, tx, rx, [lo, hi])
PART_ONE_GAINS = [
    [[[0.50, 0.80], [0.15, 0.20]],
     [[0.01, 0.05], [0.01, 0.09]]],
    [[[0.02, 0.05], [0.02, 0.06]],
     [[0.05, 0.15], [0.75, 0.95]]],
]
POWER_LEVELS = (1.0, 5.0)
PART_ONE_HORIZON = 10**5
PART_TWO_HORIZON = 10**5

# BERTS on part one: T = 80 trials per period, M = 1500 periods
BERTS_PARAMS = {"T": 80, "rho": 0.16}
BERTS_PERIODS = 1500

COMPARISONS = {
    "part_one": {
        "nr_bewas": {},
        "nr_bfpls": {},
        "uniform": {},
        "centralized_optimal": {},
    },
    "part_two": {
        "nr_bewas": {},
        "nr_bfpls": {},
        "eps_greedy": {"eps": 0.1},
        "greedy": {"explore_frac": 0.1},
        "uniform": {},
        "centralized_optimal": {},
        "centralized_no_collision": {},
    },
}


def part_one(kind: str = "nr_bewas", params: dict | None = None) -> ScenarioConfig:
    players = [PlayerSpec(kind, 2, POWER_LEVELS, dict(params or {})) for _ in range(2)]
    return ScenarioConfig(
        name="part_one",
        gain_intervals=PART_ONE_GAINS,
        players=players,
        horizon=PART_ONE_HORIZON,
        seeds=list(range(10)),
        noise_variance=0.1,
        price=1e-3,
        notes={
            "horizon": "not stated for this scenario; 1e5 makes convergence visible",
            "noise_variance": "not stated; 0.1 assumed",
        },
    )


def part_two(kind: str = "nr_bewas", params: dict | None = None) -> ScenarioConfig:
    players = [PlayerSpec(kind, 3, POWER_LEVELS, dict(params or {})) for _ in range(5)]
    return ScenarioConfig(
        name="part_two",
        gain_intervals=load_fixture("part_two_gains.json"),
        gains_fixture="part_two_gains.json",
        players=players,
        horizon=PART_TWO_HORIZON,
        seeds=list(range(10)),
        noise_variance=0.1,
        price=1e-3,
        notes={
            "gain_intervals": "not published; fixed fixture drawn from [0.01, 0.95]",
            "power_levels": "values not published; same as part_one",
            "noise_variance": "not stated; 0.1 assumed",
        },
    )


PRESETS = {"part_one": part_one, "part_two": part_two}


def preset(name: str, kind: str = "nr_bewas", params: dict | None = None) -> ScenarioConfig:
    try:
        build = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build(kind, params)


def berts_config(name: str = "part_one") -> ScenarioConfig:
    """Preset with every player on BERTS and a horizon of T * M trials."""
    cfg = preset(name, "berts", BERTS_PARAMS)
    return cfg.replace(horizon=BERTS_PARAMS["T"] * BERTS_PERIODS, seeds=list(range(6)))
