"""No-regret bandit exponentially weighted average strategy (NR-BEWAS)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ConfigError
from ..swap_transform import fixed_point
from .base import Strategy


@dataclass(frozen=True)
class BewasConfig:
    """Learning-rate and exploration schedules.

    With a known horizon n both are constant,
    eta = (ln N / (2 N n))^(2/3) and gamma = (N^2 ln N / (4 n))^(1/3), clamped
    into (0, 1]. Otherwise gamma_t = t^(-1/3) and eta_t = gamma_t^3 / N^2.
    """

    horizon_known: bool = False
    n: int | None = None

    def __post_init__(self):
        if self.horizon_known and (self.n is None or self.n < 1):
            raise ConfigError("a known-horizon schedule needs n >= 1")

    def constants(self, N: int) -> tuple[float, float, bool]:
        """(eta, gamma, clamped) for the known-horizon schedule."""
        n = self.n
        eta = (math.log(N) / (2 * N * n)) ** (2 / 3)
        gamma = (N**2 * math.log(N) / (4 * n)) ** (1 / 3)
        clamped = eta > 1 or gamma > 1
        return min(eta, 1.0), min(gamma, 1.0), clamped

    def schedule(self, t: int, N: int) -> tuple[float, float]:
        if self.horizon_known:
            eta, gamma, _ = self.constants(N)
            return eta, gamma
        gamma = t ** (-1 / 3)
        return gamma**3 / N**2, gamma


def exponential_pair_weights(table: np.ndarray, eta: float) -> np.ndarray:
    """delta[i, j] proportional to exp(eta * R[i, j]) over i != j, zero diagonal."""
    x = eta * np.asarray(table, dtype=float)
    np.fill_diagonal(x, -np.inf)
    x -= x.max()
    w = np.exp(x)
    return w / w.sum()


class NRBewas(Strategy):
    name = "nr_bewas"

    def __init__(self, n_actions: int, cfg: BewasConfig | None = None, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        self.cfg = cfg or BewasConfig()
        self.regrets = np.zeros((n_actions, n_actions))
        self.delta = None

    def _observe(self, reward: float) -> None:
        # estimated reward is reward / p_a at the played action a and 0 elsewhere, so
        # R[i, a] += p_i * reward / p_a and R[a, j] -= reward for i, j != a
        a = self.last_action
        p = self.probs
        col = p * (reward / p[a])
        col[a] = 0.0
        self.regrets[:, a] += col
        self.regrets[a, :] -= reward
        self.regrets[a, a] = 0.0

    def _next_probs(self) -> np.ndarray:
        N = self.n_actions
        if self.t == 1 or N == 1:
            return np.full(N, 1.0 / N)
        eta, gamma = self.cfg.schedule(self.t, N)
        self.delta = exponential_pair_weights(self.regrets, eta)
        p = fixed_point(self.delta)
        return (1.0 - gamma) * p + gamma / N

    def metadata(self) -> dict:
        md = super().metadata()
        md["horizon_known"] = self.cfg.horizon_known
        if self.cfg.horizon_known:
            eta, gamma, clamped = self.cfg.constants(self.n_actions)
            md.update(n=self.cfg.n, eta=eta, gamma=gamma, clamped=clamped)
        else:
            md.update(gamma_schedule="t^(-1/3)", eta_schedule="gamma_t^3 / N^2")
        return md
