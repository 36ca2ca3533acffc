"""Simulation loop.

Each trial every player steps its own strategy with nothing but its own last
reward, the environment resolves the joint profile, and the measurement side
(regret ledgers, joint counts) records what happened. Measurements never flow
back into a strategy.
"""
from __future__ import annotations

import platform
import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..core import PURPOSES, RngStream
from ..env import normalize, stationary_payoff_tensor, step
from ..regret import RegretLedger
from ..strategies import CENTRALIZED, Berts, FixedAction, centralized_profile, make_strategy
from .config import ScenarioConfig


class RunError(RuntimeError):
    """A module error raised inside the loop, tagged with the trial it happened on."""

    def __init__(self, message: str, trial: int, seed: int):
        super().__init__(f"seed {seed}, trial {trial}: {message}")
        self.trial = trial
        self.seed = seed


@dataclass
class RunTrace:
    """Strided record of one run.

    Row r of every per-checkpoint array describes trial ``t[r]`` (1-based);
    running sums cover trials 1..t[r]. ``joint`` holds empirical joint
    frequencies at decade checkpoints and at the horizon.
    """

    seed: int
    kinds: list
    t: np.ndarray
    profiles: np.ndarray
    rewards: np.ndarray
    avg_reward: np.ndarray
    external_regret: np.ndarray
    internal_regret: np.ndarray
    realized_regret: np.ndarray
    strategies: list
    joint: dict
    berts: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    ledgers: list = field(default_factory=list)
    elapsed: float = 0.0  # wall-clock seconds; kept out of metadata so outputs stay byte-identical

    @property
    def horizon(self) -> int:
        return int(self.t[-1])

    def final_strategies(self) -> list:
        return [s[-1] for s in self.strategies]

    def at(self, n: int) -> int:
        """Row index of checkpoint trial n."""
        hits = np.flatnonzero(self.t == n)
        if not hits.size:
            raise KeyError(f"trial {n} is not a checkpoint")
        return int(hits[0])


def checkpoints(horizon: int, stride: int) -> np.ndarray:
    ts = set(range(stride, horizon + 1, stride))
    ts.add(horizon)
    return np.array(sorted(ts))


def decade_checkpoints(horizon: int) -> list:
    out, d = [], 10
    while d < horizon:
        out.append(d)
        d *= 10
    return out + [horizon]


def build_players(cfg: ScenarioConfig, seed: int) -> list:
    spaces = cfg.spaces()
    kinds = [p.kind for p in cfg.players]
    if kinds[0] in CENTRALIZED:
        # planner: stationary normalized payoffs at interval midpoints
        payoffs = normalize(stationary_payoff_tensor(cfg.model(), spaces), cfg.normalizer())
        which = "optimal" if kinds[0] == "centralized_optimal" else "no_collision"
        prof = centralized_profile(payoffs, which, spaces)
        return [FixedAction(sp.num_actions, a, seed, k) for k, (sp, a) in enumerate(zip(spaces, prof))]
    return [make_strategy(p.kind, p.params, sp.num_actions, cfg.horizon, seed, k)
            for k, (p, sp) in enumerate(zip(cfg.players, spaces))]


def run(cfg: ScenarioConfig, seed: int | None = None, observe=None, keep_ledgers: bool = False) -> RunTrace:
    """Simulate one seed of a scenario.

    ``observe(t, step_result)``, if given, is called after each trial with the
    environment's full outcome; it may inspect or even overwrite the
    measurement fields, but strategies only ever see ``rewards``.
    """
    seed = cfg.seeds[0] if seed is None else int(seed)
    t0 = time.perf_counter()
    model, spaces = cfg.model(), cfg.spaces()
    norm, noise = cfg.normalizer(), cfg.noise()
    gains = model.midpoints() if cfg.stationary else None
    env_rng = RngStream(seed, -1, "environment")
    K, n = cfg.num_players, cfg.horizon
    players = build_players(cfg, seed)
    ledgers = [RegretLedger(sp.num_actions) for sp in spaces]
    shape = tuple(sp.num_actions for sp in spaces)
    counts = np.zeros(shape, dtype=np.int64)

    ts = checkpoints(n, cfg.stride)
    decades = set(decade_checkpoints(n))
    m = ts.size
    profiles = np.zeros((m, K), dtype=int)
    rewards = np.zeros((m, K))
    avg = np.zeros((m, K))
    ext, intr, real = (np.zeros((m, K)) for _ in range(3))
    strat = [np.zeros((m, sp.num_actions)) for sp in spaces]
    joint = {}
    obs = [None] * K
    row = 0
    for t in range(1, n + 1):
        try:
            acts, probs = [], []
            for k, pl in enumerate(players):
                p, a = pl.step(obs[k])
                probs.append(p)
                acts.append(a)
            res = step(acts, model, spaces, norm, noise, env_rng, gains=gains)
            if observe is not None:
                observe(t, res)
        except Exception as e:
            raise RunError(f"{type(e).__name__}: {e}", t, seed) from e
        obs = [float(r) for r in res.rewards]
        for k in range(K):
            ledgers[k].record(probs[k], acts[k], res.counterfactual[k])
        counts[tuple(acts)] += 1
        if t in decades:
            joint[t] = counts / t
        if t == ts[row]:
            profiles[row] = acts
            rewards[row] = obs
            for k, led in enumerate(ledgers):
                avg[row, k] = led.cumulative_reward / t
                ext[row, k] = led.external_regret()
                intr[row, k] = led.internal_regret()
                real[row, k] = led.realized_regret()
                strat[k][row] = probs[k]
            row += 1

    berts = [[rec for rec in pl.periods] if isinstance(pl, Berts) else [] for pl in players]
    meta = {
        "scenario": cfg.to_dict(),
        "seed": seed,
        "rng": {"bit_generator": "PCG64", "seed_sequence": "SeedSequence(seed, spawn_key=(player + 1, purpose))",
                "purposes": dict(PURPOSES), "shared_player": -1},
        "players": [pl.metadata() for pl in players],
        "checkpoints": {"stride": cfg.stride, "decades": sorted(decades)},
        "ce_payoffs": "stationary proxy (interval midpoints)",
        "package_version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    return RunTrace(
        seed=seed, kinds=[p.kind for p in cfg.players], t=ts, profiles=profiles, rewards=rewards,
        avg_reward=avg, external_regret=ext, internal_regret=intr, realized_regret=real,
        strategies=strat, joint=joint, berts=berts, metadata=meta,
        ledgers=ledgers if keep_ledgers else [], elapsed=time.perf_counter() - t0,
    )


def run_batch(cfg: ScenarioConfig, seeds=None, workers: int = 1) -> list:
    """One trace per seed; ``workers > 1`` fans seeds out over processes."""
    seeds = list(cfg.seeds if seeds is None else seeds)
    if workers <= 1 or len(seeds) == 1:
        return [run(cfg, s) for s in seeds]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=workers)(delayed(run)(cfg, s) for s in seeds)
