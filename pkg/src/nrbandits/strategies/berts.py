"""Bandit experimental regret testing (BERTS).

Time is cut into periods of T trials. In each period, s trials per action are
reserved (at random, non-overlapping) to play that action; the remaining trials
follow the period's mixed strategy. At the end of the period the experimental
regret of action n is the mean reward on its forced trials minus the mean reward
on free trials. A strategy with every experimental regret at most rho is kept
(except for a reset with probability xi); otherwise a fresh one is drawn
uniformly from the simplex.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ConfigError, RngStream, sample_simplex
from .base import Strategy


@dataclass(frozen=True)
class BertsConfig:
    T: int = 80
    rho: float = 0.16
    xi: float = 0.01
    s: int | None = None  # defaults to max(1, T // (4N))

    def __post_init__(self):
        if self.T < 2:
            raise ConfigError("period length T must be at least 2")
        if not 0 < self.xi < 1:
            raise ConfigError("xi must lie in (0, 1)")
        if self.rho <= 0:
            raise ConfigError("rho must be positive")

    def repeats(self, N: int) -> int:
        s = self.s if self.s is not None else max(1, self.T // (4 * N))
        if s < 1 or s * N >= self.T:
            raise ConfigError(f"s*N = {s * N} leaves no free trials in a period of {self.T}")
        return s


@dataclass
class PeriodRecord:
    index: int
    strategy: np.ndarray
    experimental_regret: np.ndarray
    accepted: bool
    reset: bool  # a fresh strategy follows this period


def experimental_regret(free_rewards, forced_rewards) -> np.ndarray:
    """Mean forced reward of each action minus the mean free-trial reward.

    ``forced_rewards[n]`` holds the rewards collected on trials reserved for n.
    """
    free_mean = float(np.mean(free_rewards))
    return np.array([np.mean(r) for r in forced_rewards]) - free_mean


class Berts(Strategy):
    name = "berts"

    def __init__(self, n_actions: int, cfg: BertsConfig | None = None, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        self.cfg = cfg or BertsConfig()
        self.s = self.cfg.repeats(n_actions)
        self.reset_rng = RngStream(seed, player, "reset").generator
        self.periods: list[PeriodRecord] = []
        self.current = sample_simplex(n_actions, self.reset_rng)
        self._start_period()

    def _start_period(self) -> None:
        T, N, s = self.cfg.T, self.n_actions, self.s
        schedule = np.full(T, -1)
        slots = self.reset_rng.permutation(T)[: s * N]
        schedule[slots] = np.repeat(np.arange(N), s)
        self.schedule = schedule
        self.pos = 0
        self.free: list[float] = []
        self.forced: list[list[float]] = [[] for _ in range(N)]

    def _observe(self, reward: float) -> None:
        forced = self.schedule[self.pos]
        if forced >= 0:
            self.forced[forced].append(reward)
        else:
            self.free.append(reward)
        self.pos += 1
        if self.pos == self.cfg.T:
            self._end_period()

    def _end_period(self) -> None:
        r = experimental_regret(self.free, self.forced)
        accepted = bool(r.max() <= self.cfg.rho)
        reset = (not accepted) or bool(self.reset_rng.random() < self.cfg.xi)
        self.periods.append(PeriodRecord(len(self.periods), self.current.copy(), r, accepted, reset))
        if reset:
            self.current = sample_simplex(self.n_actions, self.reset_rng)
        self._start_period()

    def _next_probs(self) -> np.ndarray:
        forced = self.schedule[self.pos]
        if forced >= 0:
            p = np.zeros(self.n_actions)
            p[forced] = 1.0
            return p
        return self.current

    def first_acceptance(self) -> int | None:
        """Index of the first period whose strategy passed the test, if any."""
        for rec in self.periods:
            if rec.accepted:
                return rec.index
        return None

    def metadata(self) -> dict:
        md = super().metadata()
        md.update(T=self.cfg.T, rho=self.cfg.rho, xi=self.cfg.xi, s=self.s)
        return md
