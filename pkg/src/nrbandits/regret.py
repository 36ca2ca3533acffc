"""Reward estimation under bandit feedback and regret bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import DomainError


def estimate_rewards(played: int, observed: float, probs: Sequence[float]) -> np.ndarray:
    """Importance-weighted estimate: observed / p[played] at the played index, 0 elsewhere."""
    p = np.asarray(probs, dtype=float)
    if p[played] <= 0:
        raise DomainError(f"played action {played} had probability {p[played]}")
    g = np.zeros(p.size)
    g[played] = observed / p[played]
    return g


class SwapRegretTable:
    """Accumulated pairwise regrets ``table[i, j] = sum_s p_i,s (g_s(j) - g_s(i))``.

    The diagonal stays at exactly zero.
    """

    def __init__(self, n: int):
        self.n = n
        self.table = np.zeros((n, n))

    def accumulate(self, probs: np.ndarray, g: np.ndarray) -> "SwapRegretTable":
        return accumulate_swap_regret(self, probs, g)

    def copy(self) -> "SwapRegretTable":
        out = SwapRegretTable(self.n)
        out.table = self.table.copy()
        return out

    def off_diagonal(self) -> np.ndarray:
        """Entries for ordered pairs (i, j), i != j, in row-major order."""
        return self.table[~np.eye(self.n, dtype=bool)]


def accumulate_swap_regret(table: SwapRegretTable, probs, g) -> SwapRegretTable:
    p = np.asarray(probs, dtype=float)
    g = np.asarray(g, dtype=float)
    if p.shape != (table.n,) or g.shape != (table.n,):
        raise DomainError("dimension mismatch in swap-regret update")
    # p_i * (g_j - g_i); the diagonal is identically zero in floating point too
    table.table += p[:, None] * (g[None, :] - g[:, None])
    return table


@dataclass
class RegretLedger:
    """Per-player running sums, updated once per trial.

    ``best_fixed_action_rewards`` and ``pairwise`` need the counterfactual
    reward of every action, so a ledger is a measurement device that sits
    outside the strategy.
    """

    n_actions: int
    cumulative_reward: float = 0.0
    expected_reward_sum: float = 0.0
    estimated_reward_sum: float = 0.0
    trials: int = 0
    best_fixed_action_rewards: np.ndarray = field(default=None)
    pairwise: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.best_fixed_action_rewards is None:
            self.best_fixed_action_rewards = np.zeros(self.n_actions)
        if self.pairwise is None:
            self.pairwise = np.zeros((self.n_actions, self.n_actions))

    def record(self, probs, played: int, counterfactual) -> None:
        p = np.asarray(probs, dtype=float)
        g = np.asarray(counterfactual, dtype=float)
        observed = g[played]
        self.cumulative_reward += observed
        self.expected_reward_sum += float(p @ g)
        self.estimated_reward_sum += float(p @ estimate_rewards(played, observed, p))
        self.best_fixed_action_rewards += g
        self.pairwise += p[:, None] * (g[None, :] - g[:, None])
        self.trials += 1

    def external_regret(self) -> float:
        return external_regret(self)

    def internal_regret(self) -> float:
        return _max_off_diagonal(self.pairwise)

    def realized_regret(self) -> float:
        """Regret of the realised plays against the best fixed action (the oracle regret)."""
        return float(self.best_fixed_action_rewards.max() - self.cumulative_reward)

    def estimated_regret(self) -> float:
        return float(self.best_fixed_action_rewards.max() - self.estimated_reward_sum)


def _max_off_diagonal(m: np.ndarray) -> float:
    n = m.shape[0]
    if n < 2:
        return 0.0
    return float(m[~np.eye(n, dtype=bool)].max())


def external_regret(ledger: RegretLedger) -> float:
    """Best fixed action in hindsight minus the expected reward collected."""
    return float(ledger.best_fixed_action_rewards.max() - ledger.expected_reward_sum)


def pairwise_regrets(probs_trace, rewards_trace) -> np.ndarray:
    """Batch form: R[i, j] = sum_t p_i,t (g_t(j) - g_t(i))."""
    P = np.asarray(probs_trace, dtype=float)
    G = np.asarray(rewards_trace, dtype=float)
    if P.shape != G.shape or P.ndim != 2:
        raise DomainError("probability and reward traces must both be (T, N)")
    R = P.T @ G - (P * G).sum(axis=0)[:, None]
    np.fill_diagonal(R, 0.0)
    return R


def internal_regret(probs_trace, rewards_trace) -> float:
    """Largest pairwise regret over ordered pairs i != j."""
    if len(probs_trace) == 0:
        raise DomainError("empty trace")
    return _max_off_diagonal(pairwise_regrets(probs_trace, rewards_trace))


def hoeffding_radius(n: int, delta: float) -> float:
    return math.sqrt(0.5 * n * math.log(1.0 / delta))


@dataclass
class ConcentrationReport:
    delta: float
    runs: int
    radius: float
    realized_violations: float
    estimated_violations: float
    max_realized_gap: float
    max_estimated_gap: float

    @property
    def bound(self) -> float:
        return 2 * self.delta


def hoeffding_gap_check(ledgers: Iterable[RegretLedger], delta: float) -> ConcentrationReport:
    """Fraction of runs where the realised (or estimated) regret strays from the
    external regret by more than sqrt(n/2 ln(1/delta))."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    ledgers = list(ledgers)
    if not ledgers:
        raise DomainError("no runs to check")
    gaps, est_gaps, radii = [], [], []
    for led in ledgers:
        rext = led.external_regret()
        gaps.append(abs(led.realized_regret() - rext))
        est_gaps.append(abs(led.estimated_regret() - rext))
        radii.append(hoeffding_radius(led.trials, delta))
    gaps, est_gaps, radii = map(np.asarray, (gaps, est_gaps, radii))
    return ConcentrationReport(
        delta=delta,
        runs=len(ledgers),
        radius=float(radii.max()),
        realized_violations=float(np.mean(gaps > radii)),
        estimated_violations=float(np.mean(est_gaps > radii)),
        max_realized_gap=float(gaps.max()),
        max_estimated_gap=float(est_gaps.max()),
    )
