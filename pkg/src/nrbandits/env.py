"""Interference game between transmitter-receiver pairs.

Player k on channel c at power l earns

    G_k = log2(l * h[c, k, k] / (sum_q l_q * h[c, q, k] + N0)) - price * l

where q ranges over the other players on the same channel and ``h[c, tx, rx]``
is the mean-square gain of the link tx -> rx on channel c. Gains are redrawn
every trial from per-link intervals.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ActionSpace, CapacityError, DomainError, RngStream

MAX_TENSOR_ENTRIES = 10**6


@dataclass(frozen=True)
class ChannelModel:
    """Gain intervals indexed (channel, tx, rx, [lo, hi]) plus noise power and power price."""

    gain_intervals: np.ndarray
    noise_variance: float = 0.1
    price: float = 1e-3

    def __post_init__(self):
        g = np.array(self.gain_intervals, dtype=float)
        if g.ndim != 4 or g.shape[1] != g.shape[2] or g.shape[3] != 2:
            raise DomainError(f"gain_intervals must have shape (C, K, K, 2), got {g.shape}")
        if np.any(g[..., 0] <= 0):
            raise DomainError("gain interval lower ends must be positive")
        if np.any(g[..., 0] > g[..., 1]):
            raise DomainError("gain interval has lo > hi")
        if self.noise_variance <= 0:
            raise DomainError("noise_variance must be positive")
        if self.price < 0:
            raise DomainError("price must be nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "gain_intervals", g)

    @property
    def num_channels(self) -> int:
        return self.gain_intervals.shape[0]

    @property
    def num_players(self) -> int:
        return self.gain_intervals.shape[1]

    def midpoints(self) -> np.ndarray:
        return self.gain_intervals.mean(axis=-1)

    def stationary(self) -> "ChannelModel":
        """Same model with every interval collapsed to its midpoint."""
        mid = self.midpoints()
        return ChannelModel(np.stack([mid, mid], axis=-1), self.noise_variance, self.price)


@dataclass(frozen=True)
class RewardNormalizer:
    """Affine map of utilities onto [0, 1], clipped outside [g_min, g_max]."""

    g_min: float = -10.0
    g_max: float = 10.0

    def __post_init__(self):
        if not self.g_min < self.g_max:
            raise DomainError("g_min must be below g_max")

    def __call__(self, G):
        return normalize(G, self)


@dataclass(frozen=True)
class NoiseModel:
    """Additive observation noise, uniform on [-half_width, half_width] in reward units."""

    half_width: float = 0.02

    def __post_init__(self):
        if self.half_width < 0:
            raise DomainError("half_width must be nonnegative")

    def draw(self, rng: RngStream, size=None):
        if self.half_width == 0:
            return np.zeros(size) if size is not None else 0.0
        return rng.generator.uniform(-self.half_width, self.half_width, size)


def check_profile(profile: Sequence[int], spaces: Sequence[ActionSpace]) -> np.ndarray:
    prof = np.asarray(profile, dtype=int)
    if prof.shape != (len(spaces),):
        raise DomainError(f"profile has {prof.size} entries for {len(spaces)} players")
    for k, (a, sp) in enumerate(zip(prof, spaces)):
        if not 0 <= a < sp.num_actions:
            raise DomainError(f"player {k} action {a} outside [0, {sp.num_actions})")
    return prof


def check_spaces(model: ChannelModel, spaces: Sequence[ActionSpace]) -> None:
    if len(spaces) != model.num_players:
        raise DomainError(f"{len(spaces)} action spaces for {model.num_players} players")
    for k, sp in enumerate(spaces):
        if sp.num_channels > model.num_channels:
            raise DomainError(f"player {k} uses {sp.num_channels} channels, model has {model.num_channels}")


def draw_gains(model: ChannelModel, rng: RngStream) -> np.ndarray:
    """One uniform draw per link and channel from its interval."""
    lo = model.gain_intervals[..., 0]
    hi = model.gain_intervals[..., 1]
    return lo + (hi - lo) * rng.generator.random(lo.shape)


def _sinr_utility(power, direct, interference, model: ChannelModel):
    arg = power * direct / (interference + model.noise_variance)
    lo, hi = np.min(arg), np.max(arg)
    if not (lo > 0 and hi < np.inf):  # also catches NaN
        raise DomainError("nonpositive or non-finite SINR")
    return np.log2(arg) - model.price * power


def expected_utility(profile: Sequence[int], gains: np.ndarray, model: ChannelModel,
                     spaces: Sequence[ActionSpace]) -> np.ndarray:
    """Utility G of every player under one joint profile and one gain draw."""
    prof = check_profile(profile, spaces)
    K = len(spaces)
    ch = np.array([sp.channel_of(a) for sp, a in zip(spaces, prof)])
    pw = np.array([sp.power_of(a) for sp, a in zip(spaces, prof)])
    out = np.empty(K)
    for k in range(K):
        others = (ch == ch[k]) & (np.arange(K) != k)
        interference = np.sum(pw[others] * gains[ch[k], others, k])
        out[k] = _sinr_utility(pw[k], gains[ch[k], k, k], interference, model)
    return out


@functools.lru_cache(maxsize=64)
def _space_arrays(sp: ActionSpace) -> tuple[np.ndarray, np.ndarray]:
    """(channel, power) of every action of a space."""
    chans, levels = np.divmod(np.arange(sp.num_actions), sp.num_levels)
    powers = np.asarray(sp.power_levels, dtype=float)[levels]
    chans.flags.writeable = False
    powers.flags.writeable = False
    return chans, powers


def counterfactual_utilities(profile: Sequence[int], gains: np.ndarray, model: ChannelModel,
                             spaces: Sequence[ActionSpace]) -> list[np.ndarray]:
    """For each player k, G_k(i, others) for every action i, others held at ``profile``."""
    prof = np.asarray(profile, dtype=int)
    K = len(spaces)
    arrays = [_space_arrays(sp) for sp in spaces]
    ch = np.array([c[a] for (c, _), a in zip(arrays, prof)])
    pw = np.array([w[a] for (_, w), a in zip(arrays, prof)])
    # contrib[q, k]: power received at k from q on q's channel; interference[c, k] sums
    # it over the other players on channel c
    contrib = pw[:, None] * gains[ch, np.arange(K), :]
    np.fill_diagonal(contrib, 0.0)
    onehot = ch[:, None] == np.arange(model.num_channels)[None, :]
    interference = onehot.T.astype(float) @ contrib
    if all(sp == spaces[0] for sp in spaces):
        chans, powers = arrays[0]
        direct = gains[chans][:, np.arange(K), np.arange(K)]  # (N, K)
        u = _sinr_utility(powers[:, None], direct, interference[chans], model)
        return list(u.T)
    out = []
    for k, (chans, powers) in enumerate(arrays):
        out.append(_sinr_utility(powers, gains[chans, k, k], interference[chans, k], model))
    return out


def normalize(G, norm: RewardNormalizer):
    """(G - g_min) / (g_max - g_min), clipped to [0, 1]."""
    return np.clip((np.asarray(G, dtype=float) - norm.g_min) / (norm.g_max - norm.g_min), 0.0, 1.0)


@dataclass
class StepResult:
    """Outcome of one trial.

    ``rewards[k]`` is what player k observes. ``counterfactual[k][i]`` is the
    reward k would have observed playing i against the same opponents, gains
    and noise; it is for regret measurement only and never reaches a strategy.
    """

    rewards: np.ndarray
    utilities: np.ndarray
    counterfactual: list[np.ndarray]
    clipped: int = 0


def step(profile: Sequence[int], model: ChannelModel, spaces: Sequence[ActionSpace],
         norm: RewardNormalizer, noise: NoiseModel, rng: RngStream,
         gains: np.ndarray | None = None) -> StepResult:
    """Resolve one trial: fresh gains, utilities, noise, normalisation and clipping."""
    prof = check_profile(profile, spaces)
    if gains is None:
        gains = draw_gains(model, rng)
    cf_util = counterfactual_utilities(prof, gains, model, spaces)
    eps = noise.draw(rng, len(spaces))
    span = norm.g_max - norm.g_min
    idx = np.arange(len(spaces))
    if len({u.size for u in cf_util}) == 1:
        U = np.vstack(cf_util)
        scaled = (U - norm.g_min) / span
        clipped = int(np.count_nonzero((scaled < 0) | (scaled > 1)))
        R = np.clip(np.clip(scaled, 0.0, 1.0) + eps[:, None], 0.0, 1.0)
        cf = list(R)
        utilities, rewards = U[idx, prof], R[idx, prof]
    else:
        cf, clipped = [], 0
        for k, u in enumerate(cf_util):
            scaled = (u - norm.g_min) / span
            clipped += int(np.count_nonzero((scaled < 0) | (scaled > 1)))
            cf.append(np.clip(np.clip(scaled, 0.0, 1.0) + eps[k], 0.0, 1.0))
        utilities = np.array([cf_util[k][prof[k]] for k in idx])
        rewards = np.array([cf[k][prof[k]] for k in idx])
    return StepResult(rewards, utilities, cf, clipped)


def stationary_payoff_tensor(model: ChannelModel, spaces: Sequence[ActionSpace],
                             variant: str = "full", gains: np.ndarray | None = None) -> np.ndarray:
    """Utility of every player at every joint profile with time-invariant gains.

    Returns an array of shape (K, N_1, ..., N_K). Gains default to interval
    midpoints. ``variant="interference_free"`` drops the interference sum.
    """
    if variant not in ("full", "interference_free"):
        raise DomainError(f"unknown variant {variant!r}")
    check_spaces(model, spaces)
    shape = tuple(sp.num_actions for sp in spaces)
    size = len(spaces) * int(np.prod(shape))
    if size > MAX_TENSOR_ENTRIES:
        raise CapacityError(f"payoff tensor would hold {size} entries (> {MAX_TENSOR_ENTRIES})")
    if gains is None:
        gains = model.midpoints()
    K = len(spaces)
    out = np.empty((K,) + shape)
    if variant == "interference_free":
        for k, sp in enumerate(spaces):
            chans, levels = np.divmod(np.arange(sp.num_actions), sp.num_levels)
            powers = np.asarray(sp.power_levels)[levels]
            own = _sinr_utility(powers, gains[chans, k, k], 0.0, model)
            view = [1] * K
            view[k] = sp.num_actions
            out[k] = np.broadcast_to(own.reshape(view), shape)
        return out
    for prof in itertools.product(*(range(n) for n in shape)):
        out[(slice(None),) + prof] = expected_utility(prof, gains, model, spaces)
    return out
