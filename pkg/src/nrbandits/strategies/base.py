from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import RngStream, uniform_strategy


class Strategy:
    """A bandit player.

    The only input a strategy ever receives is the reward of its own last
    play. ``step(observed)`` takes that reward (None on the first trial) and
    returns the mixed strategy for the current trial and the action drawn
    from it.
    """

    name = "strategy"

    def __init__(self, n_actions: int, seed: int = 0, player: int = 0):
        self.n_actions = n_actions
        self.seed = seed
        self.player = player
        self.t = 0
        self.probs = uniform_strategy(n_actions)
        self.last_action: Optional[int] = None
        self.action_rng = RngStream(seed, player, "action").generator

    def step(self, observed: float | None = None) -> tuple[np.ndarray, int]:
        if self.t > 0:
            if observed is None:
                raise ValueError("a reward for the previous play is required after the first trial")
            self._observe(float(observed))
        self.t += 1
        self.probs = self._next_probs()
        self.last_action = self._draw(self.probs)
        return self.probs, self.last_action

    def _observe(self, reward: float) -> None:
        pass

    def _next_probs(self) -> np.ndarray:
        return self.probs

    def _draw(self, probs: np.ndarray) -> int:
        cdf = np.cumsum(probs)
        i = int(np.searchsorted(cdf, self.action_rng.random() * cdf[-1], side="right"))
        i = min(i, self.n_actions - 1)
        while probs[i] == 0.0:
            i -= 1
        return i

    def metadata(self) -> dict:
        return {"kind": self.name, "n_actions": self.n_actions}
