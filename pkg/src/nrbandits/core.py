"""Shared types: action encoding, seeded random streams and probability-vector helpers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Purpose tags for independent random streams. The integer codes are part of the
# reproducibility contract; do not renumber.
PURPOSES = {
    "action": 0,
    "perturbation": 1,
    "environment": 2,
    "reset": 3,
}

# Player slot used for streams that belong to no player (e.g. the channel).
SHARED = -1

# Before renormalisation, a sum further than this from 1 means a solver bug.
SUM_HARD_TOL = 1e-9
SUM_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SolverError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class CapacityError(RuntimeError):
    """A dense enumeration would exceed the desk-scale limit."""


class ConfigError(ValueError):
    """A configuration is inconsistent or incomplete."""


@dataclass(frozen=True)
class ActionSpace:
    """Actions of one player: every (channel, power level) pair.

    Flat index = channel * num_levels + level, so with two channels and two
    levels the order is (C1,P1), (C1,P2), (C2,P1), (C2,P2).
    """

    num_channels: int
    power_levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "power_levels", tuple(float(p) for p in self.power_levels))
        if self.num_channels < 1:
            raise DomainError("num_channels must be positive")
        if not self.power_levels:
            raise DomainError("at least one power level is required")
        if any(p <= 0 for p in self.power_levels):
            raise DomainError("power levels must be positive")
        if any(b <= a for a, b in zip(self.power_levels, self.power_levels[1:])):
            raise DomainError("power levels must be strictly increasing")

    @property
    def num_levels(self) -> int:
        return len(self.power_levels)

    @property
    def num_actions(self) -> int:
        return self.num_channels * self.num_levels

    def encode(self, channel: int, level: int) -> int:
        return encode_action(channel, level, self)

    def decode(self, action: int) -> tuple[int, int]:
        return decode_action(action, self)

    def channel_of(self, action: int) -> int:
        return self.decode(action)[0]

    def power_of(self, action: int) -> float:
        return self.power_levels[self.decode(action)[1]]

    def label(self, action: int) -> str:
        c, l = self.decode(action)
        return f"(C{c + 1},P{l + 1})"


def encode_action(channel: int, level: int, space: ActionSpace) -> int:
    if not (0 <= channel < space.num_channels):
        raise DomainError(f"channel {channel} outside [0, {space.num_channels})")
    if not (0 <= level < space.num_levels):
        raise DomainError(f"level {level} outside [0, {space.num_levels})")
    return int(channel) * space.num_levels + int(level)


def decode_action(action: int, space: ActionSpace) -> tuple[int, int]:
    if not (0 <= action < space.num_actions):
        raise DomainError(f"action {action} outside [0, {space.num_actions})")
    return divmod(int(action), space.num_levels)


@dataclass
class RngStream:
    """A reproducible random stream keyed by (seed, player, purpose).

    Streams with different keys are derived through ``SeedSequence`` spawn
    keys, which makes them statistically independent.
    """

    seed: int
    player: int
    purpose: str
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.purpose not in PURPOSES:
            raise DomainError(f"unknown stream purpose {self.purpose!r}")
        # spawn keys must be non-negative; slot 0 is reserved for SHARED
        key = (int(self.player) + 1, PURPOSES[self.purpose])
        if key[0] < 0:
            raise DomainError("player index must be >= -1")
        ss = np.random.SeedSequence(int(self.seed) % 2**64, spawn_key=key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    @property
    def stream_id(self) -> tuple[int, str]:
        return (self.player, self.purpose)

    def random(self, size=None):
        return self.generator.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)


def check_strategy(probs: Sequence[float], tol: float = SUM_HARD_TOL) -> np.ndarray:
    """Return ``probs`` as an array, raising DomainError if it is not a distribution."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("a mixed strategy is a non-empty vector")
    if not np.all(np.isfinite(p)):
        raise DomainError("mixed strategy has non-finite entries")
    if p.min() < 0:
        raise DomainError(f"negative probability mass {p.min():.3e}")
    if abs(p.sum() - 1.0) > tol:
        raise DomainError(f"probabilities sum to {p.sum():.15f}")
    return p


def sample_from(probs: Sequence[float], rng: RngStream | np.random.Generator) -> int:
    """Draw an index with probability ``probs[i]`` (inverse-CDF on one uniform)."""
    p = check_strategy(probs)
    gen = rng.generator if isinstance(rng, RngStream) else rng
    cdf = np.cumsum(p)
    i = int(np.searchsorted(cdf, gen.random() * cdf[-1], side="right"))
    # guards against u*cdf[-1] == cdf[-1] after rounding and zero-mass tails
    i = min(i, p.size - 1)
    while p[i] == 0.0:
        i -= 1
    return i


def project_to_simplex(v: Sequence[float], hard_tol: float | None = None) -> np.ndarray:
    """Clamp negative entries to zero and renormalise.

    An input that is already a valid distribution is returned unchanged. With
    ``hard_tol`` set, a pre-normalisation sum further than that from 1 raises.
    """
    x = np.array(v, dtype=float)
    if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
        raise DomainError("cannot project a non-finite or empty vector")
    if hard_tol is not None and abs(x.sum() - 1.0) > hard_tol:
        raise DomainError(f"vector sums to {x.sum():.15f} before renormalisation")
    if x.min() >= 0 and abs(x.sum() - 1.0) <= SUM_TOL:
        return x
    np.maximum(x, 0.0, out=x)
    s = x.sum()
    if s <= 0:
        raise DomainError("vector has no positive mass")
    return x / s


def uniform_strategy(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def sample_simplex(n: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Uniform draw from the (n-1)-simplex via normalised exponential spacings."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    e = gen.exponential(1.0, size=n)
    return e / e.sum()
