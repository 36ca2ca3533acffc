from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrbandits.core import ActionSpace, CapacityError, DomainError, RngStream
from nrbandits.env import (ChannelModel, NoiseModel, RewardNormalizer, counterfactual_utilities, draw_gains,
                           expected_utility, normalize, stationary_payoff_tensor, step)

from nrbandits.harness.presets import PART_ONE_GAINS

from .helpers import part_one_model, part_one_spaces


def _single(gain, n0=1.0, price=0.0, channels=1):
    g = np.full((channels, 1, 1, 2), gain)
    return ChannelModel(g, n0, price)


def test_degenerate_interval_draws_exactly():
    m = _single(0.5)
    assert draw_gains(m, RngStream(0, -1, "environment"))[0, 0, 0] == 0.5


def test_draw_mean_and_support():
    m = part_one_model()
    rng = RngStream(1, -1, "environment")
    draws = np.array([draw_gains(m, rng)[0, 0, 0] for _ in range(10**5)])
    assert abs(draws.mean() - 0.65) <= 0.01
    assert draws.min() >= 0.50 and draws.max() <= 0.80


def test_model_validation():
    good = np.asarray(PART_ONE_GAINS)
    bad = good.copy()
    bad[0, 0, 0] = [0.8, 0.5]
    with pytest.raises(DomainError):
        ChannelModel(bad)
    bad = good.copy()
    bad[0, 0, 0, 0] = 0.0
    with pytest.raises(DomainError):
        ChannelModel(bad)
    with pytest.raises(DomainError):
        ChannelModel(good[:, :, :1])
    with pytest.raises(DomainError):
        ChannelModel(good, noise_variance=0.0)
    with pytest.raises(DomainError):
        ChannelModel(good, price=-1.0)


def test_unit_sinr_utility():
    m = _single(1.0)
    sp = [ActionSpace(1, (1.0,))]
    assert expected_utility([0], m.midpoints(), m, sp)[0] == 0.0


def test_scalar_utility_with_listed_constants():
    m = _single(0.775, n0=0.1, price=1e-3)
    sp = [ActionSpace(1, (1.0, 5.0))]
    got = expected_utility([1], m.midpoints(), m, sp)[0]
    assert got == pytest.approx(math.log2(5 * 0.775 / 0.1) - 0.005, abs=1e-12)


def _utility_oracle(profile, gains, model, spaces):
    """The utility written out player by player with explicit loops."""
    out = []
    for k, (sp, a) in enumerate(zip(spaces, profile)):
        c, l = divmod(a, sp.num_levels)
        pw = sp.power_levels[l]
        interference = 0.0
        for q, (sq, b) in enumerate(zip(spaces, profile)):
            cq, lq = divmod(b, sq.num_levels)
            if q != k and cq == c:
                interference += sq.power_levels[lq] * gains[c, q, k]
        out.append(math.log2(pw * gains[c, k, k] / (interference + model.noise_variance)) - model.price * pw)
    return np.array(out)


def test_interference_only_on_shared_channel():
    m, sp = part_one_model(), part_one_spaces()
    g = m.midpoints()
    apart = expected_utility([1, 3], g, m, sp)
    # different channels: each utility equals the noise-only value
    for k, c in enumerate([0, 1]):
        assert apart[k] == pytest.approx(math.log2(5.0 * g[c, k, k] / 0.1) - 5e-3, abs=1e-12)
    shared = expected_utility([1, 1], g, m, sp)
    assert shared[0] == pytest.approx(math.log2(5.0 * g[0, 0, 0] / (5.0 * g[0, 1, 0] + 0.1)) - 5e-3, abs=1e-12)
    assert np.all(shared < apart)


def test_expected_utility_matches_loop_oracle():
    rng = np.random.default_rng(4)
    for K, C in [(2, 2), (3, 2), (5, 3)]:
        g = np.sort(rng.uniform(0.01, 0.95, (C, K, K, 2)), axis=-1)
        m = ChannelModel(g, 0.1, 1e-3)
        spaces = [ActionSpace(C, (1.0, 5.0))] * K
        for _ in range(30):
            gains = draw_gains(m, RngStream(int(rng.integers(1000)), -1, "environment"))
            prof = [int(rng.integers(2 * C)) for _ in range(K)]
            assert np.allclose(expected_utility(prof, gains, m, spaces),
                               _utility_oracle(prof, gains, m, spaces), atol=1e-12)


def test_counterfactuals_match_unilateral_deviations():
    rng = np.random.default_rng(5)
    C, K = 3, 4
    g = np.sort(rng.uniform(0.01, 0.95, (C, K, K, 2)), axis=-1)
    m = ChannelModel(g, 0.1, 1e-3)
    # mixed spaces exercise the per-player path
    spaces = [ActionSpace(3, (1.0, 5.0)), ActionSpace(2, (1.0, 2.0, 5.0)), ActionSpace(3, (1.0, 5.0)),
              ActionSpace(1, (2.0,))]
    for _ in range(20):
        prof = [int(rng.integers(sp.num_actions)) for sp in spaces]
        gains = m.midpoints()
        cf = counterfactual_utilities(prof, gains, m, spaces)
        for k, sp in enumerate(spaces):
            for i in range(sp.num_actions):
                dev = list(prof)
                dev[k] = i
                assert cf[k][i] == pytest.approx(_utility_oracle(dev, gains, m, spaces)[k], abs=1e-12)


def test_nonpositive_sinr_is_guarded():
    m = _single(1.0)
    sp = [ActionSpace(1, (1.0,))]
    with pytest.raises(DomainError):
        expected_utility([0], np.zeros((1, 1, 1)), m, sp)


def test_normalize_endpoints_and_midpoint():
    n = RewardNormalizer(-10, 10)
    assert normalize(-10, n) == 0.0
    assert normalize(10, n) == 1.0
    assert normalize(0.0, n) == 0.5
    assert normalize(-50, n) == 0.0 and normalize(50, n) == 1.0


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_normalize_weakly_monotone(a, b):
    n = RewardNormalizer(-10, 10)
    if a < b:
        assert normalize(a, n) <= normalize(b, n)


def test_normalizer_validation():
    with pytest.raises(DomainError):
        RewardNormalizer(1.0, 1.0)
    with pytest.raises(DomainError):
        NoiseModel(-0.1)


def test_step_deterministic_without_randomness():
    g = np.asarray(PART_ONE_GAINS)
    mid = np.repeat(g.mean(axis=-1, keepdims=True), 2, axis=-1)
    m = ChannelModel(mid, 0.1, 1e-3)
    sp = part_one_spaces()
    a = step([1, 3], m, sp, RewardNormalizer(), NoiseModel(0.0), RngStream(0, -1, "environment"))
    b = step([1, 3], m, sp, RewardNormalizer(), NoiseModel(0.0), RngStream(99, -1, "environment"))
    assert np.array_equal(a.rewards, b.rewards)
    assert np.allclose(a.rewards, normalize(expected_utility([1, 3], m.midpoints(), m, sp), RewardNormalizer()))


def test_listed_equilibrium_beats_unilateral_deviations():
    m, sp = part_one_model(), part_one_spaces()
    g = m.midpoints()
    eq = expected_utility([1, 3], g, m, sp)
    for k in range(2):
        for i in range(4):
            if i == [1, 3][k]:
                continue
            dev = [1, 3]
            dev[k] = i
            assert expected_utility(dev, g, m, sp)[k] < eq[k]


def test_rewards_in_unit_interval_and_noise_shared_across_counterfactuals():
    m, sp = part_one_model(), part_one_spaces()
    rng = RngStream(2, -1, "environment")
    norm, noise = RewardNormalizer(-2.0, 2.0), NoiseModel(0.3)  # forces clipping
    clipped = 0
    for t in range(300):
        prof = [t % 4, (t // 4) % 4]
        r = step(prof, m, sp, norm, noise, rng)
        clipped += r.clipped
        for k in range(2):
            assert 0.0 <= r.rewards[k] <= 1.0
            assert np.all((r.counterfactual[k] >= 0) & (r.counterfactual[k] <= 1))
            assert r.rewards[k] == r.counterfactual[k][prof[k]]
    assert clipped > 0


def test_observed_reward_mean_matches_expected_utility():
    m, sp = part_one_model(), part_one_spaces()
    rng = RngStream(7, -1, "environment")
    norm, noise = RewardNormalizer(), NoiseModel(0.02)
    n = 10**5
    diff = np.empty((n, 2))
    for t in range(n):
        gains = draw_gains(m, rng)
        r = step([1, 3], m, sp, norm, noise, rng, gains=gains)
        diff[t] = r.rewards - normalize(expected_utility([1, 3], gains, m, sp), norm)
    se = diff.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(diff.mean(axis=0)) <= 3 * se)
    assert np.all(np.abs(diff) <= 0.02 + 1e-12)


def test_tensor_single_player():
    m = ChannelModel(np.array([[[[0.4, 0.6]]], [[[0.2, 0.3]]]]), 0.1, 1e-3)
    sp = [ActionSpace(2, (1.0, 5.0))]
    T = stationary_payoff_tensor(m, sp)
    assert T.shape == (1, 4)
    for a in range(4):
        assert T[0, a] == pytest.approx(expected_utility([a], m.midpoints(), m, sp)[0], abs=1e-15)


def test_tensor_brute_force_sum_argmax():
    m, sp = part_one_model(), part_one_spaces()
    T = stationary_payoff_tensor(m, sp)
    best, arg = -np.inf, None
    for prof in itertools.product(range(4), range(4)):
        v = _utility_oracle(prof, m.midpoints(), m, sp).sum()
        assert T[(slice(None),) + prof] == pytest.approx(_utility_oracle(prof, m.midpoints(), m, sp), abs=1e-12)
        if v > best:
            best, arg = v, prof
    assert arg == (1, 3)


def test_interference_free_tensor_is_additive():
    rng = np.random.default_rng(8)
    g = np.sort(rng.uniform(0.01, 0.95, (2, 3, 3, 2)), axis=-1)
    m = ChannelModel(g, 0.1, 1e-3)
    sp = [ActionSpace(2, (1.0, 5.0))] * 3
    T = stationary_payoff_tensor(m, sp, variant="interference_free")
    for k in range(3):
        # no entry depends on other players' coordinates
        own = np.moveaxis(T[k], k, 0).reshape(4, -1)
        assert np.all(own == own[:, :1])


def test_tensor_capacity_guard():
    g = np.full((3, 8, 8, 2), 0.5)
    sp = [ActionSpace(3, (1.0, 5.0))] * 8  # 8 * 6^8 entries
    with pytest.raises(CapacityError):
        stationary_payoff_tensor(ChannelModel(g), sp)


def test_tensor_rejects_unknown_variant():
    with pytest.raises(DomainError):
        stationary_payoff_tensor(part_one_model(), part_one_spaces(), variant="other")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_step_rewards_bounded_for_random_models(seed):
    rng = np.random.default_rng(seed)
    K, C = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    g = np.sort(rng.uniform(0.01, 0.95, (C, K, K, 2)), axis=-1)
    m = ChannelModel(g, 0.1, 1e-3)
    sp = [ActionSpace(C, (1.0, 5.0))] * K
    r = step([int(rng.integers(2 * C)) for _ in range(K)], m, sp, RewardNormalizer(), NoiseModel(0.02),
             RngStream(seed, -1, "environment"))
    assert np.all((r.rewards >= 0) & (r.rewards <= 1))
