"""Comparison players: uniform, epsilon-greedy, explore-then-commit greedy, and
two centralized planners that see the stationary payoff tensor."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..core import CapacityError, ConfigError
from ..env import MAX_TENSOR_ENTRIES
from .base import Strategy


class Uniform(Strategy):
    name = "uniform"


class EmpiricalMeans:
    """Running mean reward per action; unseen actions rank first."""

    def __init__(self, n: int):
        self.sums = np.zeros(n)
        self.counts = np.zeros(n, dtype=int)

    def update(self, action: int, reward: float) -> None:
        self.sums[action] += reward
        self.counts[action] += 1

    def best(self) -> int:
        means = np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.inf)
        return int(np.argmax(means))  # lowest index on ties


class EpsGreedy(Strategy):
    name = "eps_greedy"

    def __init__(self, n_actions: int, eps: float = 0.1, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        if not 0 <= eps <= 1:
            raise ConfigError("eps must lie in [0, 1]")
        self.eps = eps
        self.means = EmpiricalMeans(n_actions)

    def _observe(self, reward: float) -> None:
        self.means.update(self.last_action, reward)

    def _next_probs(self) -> np.ndarray:
        p = np.full(self.n_actions, self.eps / self.n_actions)
        p[self.means.best()] += 1.0 - self.eps
        return p

    def metadata(self) -> dict:
        return {**super().metadata(), "eps": self.eps, "unseen_actions": "optimistic"}


class Greedy(Strategy):
    """Uniform play for the first ceil(explore_frac * n) trials, then the best empirical mean."""

    name = "greedy"

    def __init__(self, n_actions: int, horizon: int, explore_frac: float = 0.1, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        if not 0 <= explore_frac <= 1:
            raise ConfigError("explore_frac must lie in [0, 1]")
        self.explore_frac = explore_frac
        self.explore_trials = math.ceil(explore_frac * horizon)
        self.means = EmpiricalMeans(n_actions)
        self.locked: int | None = None

    def _observe(self, reward: float) -> None:
        if self.locked is None:
            self.means.update(self.last_action, reward)

    def _next_probs(self) -> np.ndarray:
        if self.t <= self.explore_trials:
            return np.full(self.n_actions, 1.0 / self.n_actions)
        if self.locked is None:
            self.locked = self.means.best()
        p = np.zeros(self.n_actions)
        p[self.locked] = 1.0
        return p

    def metadata(self) -> dict:
        return {**super().metadata(), "explore_frac": self.explore_frac, "explore_trials": self.explore_trials}


class FixedAction(Strategy):
    """Plays one assigned action forever (the per-player half of a centralized plan)."""

    name = "fixed"

    def __init__(self, n_actions: int, action: int, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        self.action = action
        self.probs = np.zeros(n_actions)
        self.probs[action] = 1.0

    def metadata(self) -> dict:
        return {**super().metadata(), "action": self.action}


def collision_free_scores(rewards: np.ndarray, spaces) -> np.ndarray:
    """Sum over players of rewards, counting a player on a shared channel as 0.

    ``rewards`` has shape (K, N_1, ..., N_K).
    """
    K = rewards.shape[0]
    out = np.zeros(rewards.shape[1:])
    for prof in itertools.product(*(range(n) for n in rewards.shape[1:])):
        ch = [sp.channel_of(a) for sp, a in zip(spaces, prof)]
        out[prof] = sum(rewards[(k,) + prof] for k in range(K) if ch.count(ch[k]) == 1)
    return out


def centralized_profile(payoffs: np.ndarray, kind: str = "optimal", spaces=None) -> tuple[int, ...]:
    """Joint profile a central planner assigns.

    ``optimal`` maximises the sum of payoffs over all profiles. ``no_collision``
    scores every player that shares its channel with someone as 0 (payoffs
    should then be rewards in [0, 1]) and maximises that score; when there are
    more players than channels every profile collides and the rule still
    applies. Ties go to the lexicographically first profile.
    """
    if payoffs.size > MAX_TENSOR_ENTRIES:
        raise CapacityError(f"payoff tensor has {payoffs.size} entries")
    if kind == "optimal":
        score = payoffs.sum(axis=0)
    elif kind == "no_collision":
        if spaces is None:
            raise ConfigError("no_collision planning needs the action spaces")
        score = collision_free_scores(payoffs, spaces)
    else:
        raise ConfigError(f"unknown centralized kind {kind!r}")
    return tuple(int(a) for a in np.unravel_index(int(np.argmax(score)), score.shape))
