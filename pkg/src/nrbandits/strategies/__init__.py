from __future__ import annotations

from ..core import ConfigError
from .base import Strategy
from .baselines import EpsGreedy, FixedAction, Greedy, Uniform, centralized_profile
from .berts import Berts, BertsConfig
from .bewas import BewasConfig, NRBewas, exponential_pair_weights
from .bfpls import BfplsConfig, BfplsState, NRBfpls, bfpls_virtual_probabilities

CENTRALIZED = ("centralized_optimal", "centralized_no_collision")
KINDS = ("nr_bewas", "nr_bfpls", "berts", "uniform", "eps_greedy", "greedy") + CENTRALIZED

__all__ = [
    "Strategy", "NRBewas", "BewasConfig", "NRBfpls", "BfplsConfig", "BfplsState", "Berts",
    "BertsConfig", "Uniform", "EpsGreedy", "Greedy", "FixedAction", "centralized_profile",
    "exponential_pair_weights", "bfpls_virtual_probabilities", "make_strategy", "KINDS",
    "CENTRALIZED",
]


def make_strategy(kind: str, params: dict, n_actions: int, horizon: int, seed: int, player: int) -> Strategy:
    """Build a decentralized player from its kind name and parameters.

    Centralized kinds are assigned by the harness (they need the payoff tensor).
    """
    p = dict(params or {})
    if kind == "nr_bewas":
        known = bool(p.pop("horizon_known", False))
        cfg = BewasConfig(horizon_known=known, n=p.pop("n", horizon) if known else None)
        s = NRBewas(n_actions, cfg, seed, player)
    elif kind == "nr_bfpls":
        cfg = BfplsConfig(n=p.pop("n", horizon), **_take(p, "eps_role", "shift_sign", "delta_floor", "start"))
        s = NRBfpls(n_actions, cfg, seed, player)
    elif kind == "berts":
        cfg = BertsConfig(**_take(p, "T", "rho", "xi", "s"))
        s = Berts(n_actions, cfg, seed, player)
    elif kind == "uniform":
        s = Uniform(n_actions, seed, player)
    elif kind == "eps_greedy":
        s = EpsGreedy(n_actions, p.pop("eps", 0.1), seed, player)
    elif kind == "greedy":
        s = Greedy(n_actions, horizon, p.pop("explore_frac", 0.1), seed, player)
    else:
        raise ConfigError(f"unknown strategy kind {kind!r}")
    if p:
        raise ConfigError(f"unused parameters for {kind}: {sorted(p)}")
    return s


def _take(d: dict, *keys) -> dict:
    return {k: d.pop(k) for k in keys if k in d}
