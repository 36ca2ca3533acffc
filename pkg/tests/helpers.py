from __future__ import annotations

import numpy as np

from nrbandits.core import ActionSpace
from nrbandits.env import ChannelModel
from nrbandits.harness.presets import PART_ONE_GAINS, POWER_LEVELS


def part_one_model() -> ChannelModel:
    return ChannelModel(np.asarray(PART_ONE_GAINS), 0.1, 1e-3)


def part_one_spaces() -> list:
    return [ActionSpace(2, POWER_LEVELS)] * 2


def random_model(rng, C: int, K: int) -> ChannelModel:
    return ChannelModel(np.sort(rng.uniform(0.01, 0.95, (C, K, K, 2)), axis=-1), 0.1, 1e-3)
