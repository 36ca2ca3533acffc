"""No-regret bandit follow-the-perturbed-leader strategy (NR-BFPLS).

Every virtual action (i -> j) gets an independent two-sided exponential
(Laplace) perturbation of width eps; the pair probabilities are the chances
that each perturbed regret is the largest. They are evaluated by quadrature:

    delta_i = int f(m - R_i) prod_{j != i} F(m - R_j) dm

with f and F the Laplace density and CDF.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ConfigError, DomainError, RngStream
from ..swap_transform import fixed_point, matrix_to_pairs, pairs_to_matrix
from .base import Strategy

LN2 = math.log(2.0)

# Breakpoints of the quadrature panels, in units of eps away from the pair's own
# regret. Panels widen because the density decays like exp(-|s|).
_PANEL_EDGES = np.array([0.0, 1.0, 2.5, 4.5, 7.0, 10.0, 14.0, 19.0, 25.0, 32.0, 40.0])
_PANEL_EDGES = np.concatenate([-_PANEL_EDGES[:0:-1], _PANEL_EDGES])
WINDOW = 40.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
# Pairs whose win probability is provably below exp(-LOG_CUTOFF) are set to zero.
LOG_CUTOFF = 700.0


def laplace_log_cdf(z: np.ndarray) -> np.ndarray:
    """log F(z) for the unit Laplace law."""
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    return np.where(z < 0, z - LN2, np.log1p(-0.5 * e))


def laplace_difference_cdf(d: float) -> float:
    """P(X - Y <= d) for X, Y i.i.d. unit Laplace."""
    if d >= 0:
        return 1.0 - 0.5 * math.exp(-d) * (1.0 + 0.5 * d)
    return 0.5 * math.exp(d) * (1.0 - 0.5 * d)


def bfpls_virtual_probabilities(regrets, eps: float, mode: str = "quadrature",
                                samples: int = 10**5, rng: np.random.Generator | None = None) -> np.ndarray:
    """Probability that each entry of ``regrets`` is the largest after Laplace(eps) perturbation.

    ``mode="quadrature"`` is deterministic; ``mode="montecarlo"`` counts argmax
    frequencies over ``samples`` perturbation draws and is meant as a cross-check.
    """
    R = np.asarray(regrets, dtype=float)
    if R.ndim != 1 or R.size == 0:
        raise DomainError("regrets must be a non-empty vector")
    if not np.all(np.isfinite(R)):
        raise DomainError("regrets must be finite")
    if not eps > 0:
        raise DomainError("perturbation width must be positive")
    if R.size == 1:
        return np.ones(1)
    if mode == "montecarlo":
        rng = rng if rng is not None else np.random.default_rng()
        out = np.zeros(R.size)
        chunk = 10**5
        done = 0
        while done < samples:
            m = min(chunk, samples - done)
            mu = rng.laplace(0.0, eps, size=(m, R.size))
            out += np.bincount(np.argmax(R + mu, axis=1), minlength=R.size)
            done += m
        return out / samples
    if mode != "quadrature":
        raise DomainError(f"unknown mode {mode!r}")
    return _quadrature(R / eps)


def _quadrature(R: np.ndarray) -> np.ndarray:
    """Same as above with regrets already divided by eps (unit-width perturbations).

    With f/F = h, the integrand of pair i is h(m - R_i) * Q(m), where
    Q(m) = prod_j F(m - R_j) is shared by all pairs, so one grid serves all of
    them. h(z) = 1 for z <= 0 and exp(-z) / (2 - exp(-z)) above. Outside
    max(R) +- WINDOW the integrand is below exp(-WINDOW).
    """
    top = R.max()
    # P(pair i wins) <= P(it beats the leader), which has a closed form; pairs far
    # below the leader underflow and are skipped
    gap = top - R
    active = np.flatnonzero(gap - np.log1p(0.5 * gap) < LOG_CUTOFF)
    kinks = R[gap < WINDOW]
    edges = np.unique(np.concatenate([top + _PANEL_EDGES, kinks]))
    half = 0.5 * np.diff(edges)
    m = ((edges[:-1] + half)[:, None] + half[:, None] * _GL_NODES).ravel()
    w = (half[:, None] * _GL_WEIGHTS).ravel()
    Z = m[:, None] - R[None, :]
    logQ = laplace_log_cdf(Z).sum(axis=1)
    Za = np.maximum(Z[:, active], 0.0)
    logh = -Za - np.log(2.0 - np.exp(-Za))
    probs = np.zeros(R.size)
    probs[active] = w @ np.exp(logh + logQ[:, None])
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise DomainError(f"perturbation probabilities sum to {total:.9f}")
    return probs / total


@dataclass(frozen=True)
class BfplsConfig:
    """Known horizon n fixes eps = sqrt(ln n) / (3 sqrt(N n)) and gamma = min(1, N eps).

    ``eps_role="rate"`` reads eps as the rate of the Laplace density
    (eps / 2) exp(-eps |x|), so perturbations have scale 1 / eps;
    ``"scale"`` uses eps itself as the scale. ``shift_sign`` is applied to
    the confidence term; ``delta_floor`` keeps the running sum of 1/delta
    finite; ``start`` picks the fixed point when the swap chain is reducible
    (the limit reached from the uniform or from the previous strategy).
    """

    n: int
    eps_role: str = "rate"
    shift_sign: float = -1.0
    delta_floor: float = 1e-12
    start: str = "previous"

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("BFPLS needs a horizon n >= 2")
        if self.start not in ("uniform", "previous"):
            raise ConfigError(f"unknown start {self.start!r}")
        if self.eps_role not in ("rate", "scale"):
            raise ConfigError(f"unknown eps_role {self.eps_role!r}")

    def eps(self, N: int) -> float:
        return math.sqrt(math.log(self.n)) / (3.0 * math.sqrt(N * self.n))

    def scale(self, N: int) -> float:
        """Width of the perturbations actually drawn."""
        e = self.eps(N)
        return 1.0 / e if self.eps_role == "rate" else e

    def gamma(self, N: int) -> float:
        return min(1.0, N * self.eps(N))

    @staticmethod
    def shift_coeff(N: int) -> float:
        return math.sqrt(1.0 + math.sqrt(2.0 / N))


class BfplsState:
    """Raw swap-regret table, running sums of 1/delta per pair, trial counter."""

    def __init__(self, n_actions: int):
        self.n = n_actions
        self.regrets = np.zeros((n_actions, n_actions))
        m = n_actions * (n_actions - 1)
        self.inv_prob_sums = np.zeros((n_actions, n_actions))
        self.inv_prob_sums[~np.eye(n_actions, dtype=bool)] = m  # uniform delta at t = 1
        self.t = 1

    def sigma(self) -> np.ndarray:
        return np.sqrt(self.inv_prob_sums)

    def shifted(self, coeff: float, sign: float) -> np.ndarray:
        """Regrets with the confidence term sign * coeff * sigma * sqrt(ln t) applied."""
        return self.regrets + sign * coeff * self.sigma() * math.sqrt(math.log(self.t))


class NRBfpls(Strategy):
    name = "nr_bfpls"

    def __init__(self, n_actions: int, cfg: BfplsConfig, seed: int = 0, player: int = 0):
        super().__init__(n_actions, seed, player)
        self.cfg = cfg
        self.state = BfplsState(n_actions)
        self.eps = cfg.eps(n_actions)
        self.scale = cfg.scale(n_actions)
        self.gamma = cfg.gamma(n_actions)
        self.coeff = cfg.shift_coeff(n_actions)
        self.delta = None
        self._base = None  # fixed point before exploration mixing

    def _observe(self, reward: float) -> None:
        a = self.last_action
        p = self.probs
        col = p * (reward / p[a])
        col[a] = 0.0
        R = self.state.regrets
        R[:, a] += col
        R[a, :] -= reward
        R[a, a] = 0.0

    def _next_probs(self) -> np.ndarray:
        N = self.n_actions
        st = self.state
        if self.t == 1 or N == 1:
            return np.full(N, 1.0 / N)
        st.t = self.t
        shifted = matrix_to_pairs(st.shifted(self.coeff, self.cfg.shift_sign))
        delta = pairs_to_matrix(bfpls_virtual_probabilities(shifted, self.scale), N)
        inv = 1.0 / np.maximum(delta, self.cfg.delta_floor)
        np.fill_diagonal(inv, 0.0)
        st.inv_prob_sums += inv
        self.delta = delta
        start = self._base if self.cfg.start == "previous" else None
        self._base = fixed_point(delta, start=start)
        return (1.0 - self.gamma) * self._base + self.gamma / N

    def metadata(self) -> dict:
        md = super().metadata()
        md.update(n=self.cfg.n, eps=self.eps, eps_role=self.cfg.eps_role, perturbation_scale=self.scale,
                  gamma=self.gamma, shift_coeff=self.coeff,
                  shift_sign=self.cfg.shift_sign, delta_floor=self.cfg.delta_floor,
                  start=self.cfg.start, sigma_seed=self.n_actions * (self.n_actions - 1))
        return md
