from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from nrbandits.core import ConfigError, RngStream
from nrbandits.env import draw_gains, expected_utility, normalize
from nrbandits.harness import (COMPARISONS, PlayerSpec, RunError, ScenarioConfig, berts_config, load_config,
                               parse_seeds, parse_strategy, preset, run, run_batch)
from nrbandits.harness.cli import main
from nrbandits.harness.io import TraceIOError, find_runs, load_trace, save_trace
from nrbandits.harness.report import report
from nrbandits.harness.run import checkpoints, decade_checkpoints


def short(name="part_one", kind="nr_bewas", params=None, horizon=500, stride=50):
    return preset(name, kind, params).replace(horizon=horizon, stride=stride, seeds=[0, 1])


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------- presets


def test_part_one_preset_values():
    cfg = preset("part_one")
    g = cfg.gain_intervals
    assert list(g[0, 0, 0]) == [0.50, 0.80]
    assert list(g[1, 1, 1]) == [0.75, 0.95]
    assert cfg.price == 1e-3
    assert [p.power_levels for p in cfg.players] == [(1.0, 5.0)] * 2
    assert cfg.num_players == 2 and g.shape[0] == 2


def test_part_two_preset_values():
    cfg = preset("part_two")
    assert cfg.num_players == 5 and cfg.gain_intervals.shape[0] == 3
    assert all(sp.num_actions == 6 for sp in cfg.spaces())
    g = cfg.gain_intervals
    assert g.min() >= 0.01 and g.max() <= 0.95 and np.all(g[..., 0] <= g[..., 1])
    assert COMPARISONS["part_two"]["eps_greedy"] == {"eps": 0.1}


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("part_three")


def test_berts_preset():
    cfg = berts_config()
    assert cfg.horizon == 80 * 1500 and len(cfg.seeds) == 6
    assert cfg.players[0].params == {"T": 80, "rho": 0.16}


# ---------------------------------------------------------------- config


def test_toml_roundtrip(tmp_path):
    for cfg in (preset("part_one", "nr_bfpls", {"eps_role": "scale"}), preset("part_two", "eps_greedy", {"eps": 0.2})):
        path = cfg.save(tmp_path / f"{cfg.name}.toml")
        back = load_config(path)
        assert back.to_dict() == cfg.to_dict()
        assert np.array_equal(back.gain_intervals, cfg.gain_intervals)
    assert "gains_fixture" in preset("part_two").to_toml()


def _base_dict():
    return preset("part_one").to_dict()


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(schema=2),
    lambda d: d.update(extra=1),
    lambda d: d["channel"].update(bogus=1),
    lambda d: d.update(horizon=0),
    lambda d: d["players"][0].update(kind="nope"),
    lambda d: d["players"][0].update(kind="centralized_optimal"),
    lambda d: d["players"][0].update(channels=3),
    lambda d: d["players"][0].update(power_levels=[5.0, 1.0]),
    lambda d: d["channel"].update(noise_variance=-1.0),
    lambda d: d["channel"].update(gains=[[[[0.1, 0.2]]]]),
    lambda d: d["channel"].update(gains_fixture="missing.json"),
    lambda d: d.pop("players"),
    lambda d: d.update(seeds=[]),
])
def test_config_errors(mutate):
    d = _base_dict()
    mutate(d)
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(d)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("schema = = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_with_strategy_and_replace():
    cfg = preset("part_one")
    one = cfg.with_strategy("nr_bfpls", {"start": "uniform"}, player=1)
    assert [p.kind for p in one.players] == ["nr_bewas", "nr_bfpls"]
    assert cfg.players[1].kind == "nr_bewas"  # original untouched
    with pytest.raises(ConfigError):
        cfg.replace(colour="red")
    with pytest.raises(ConfigError):
        cfg.with_strategy("centralized_optimal", player=0)


def test_parse_seeds():
    assert parse_seeds("3") == [3]
    assert parse_seeds("0..4") == [0, 1, 2, 3, 4]
    assert parse_seeds("1,4,7") == [1, 4, 7]
    for bad in ("5..2", "a", "1..b"):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def test_parse_strategy():
    assert parse_strategy("nr_bfpls") == ("nr_bfpls", {})
    assert parse_strategy("berts=T=80,rho=0.16") == ("berts", {"T": 80, "rho": 0.16})
    assert parse_strategy("nr_bewas=horizon_known=true") == ("nr_bewas", {"horizon_known": True})
    assert parse_strategy("nr_bfpls=start=uniform") == ("nr_bfpls", {"start": "uniform"})
    with pytest.raises(ConfigError):
        parse_strategy("berts=T")


def test_checkpoint_helpers():
    assert list(checkpoints(250, 100)) == [100, 200, 250]
    assert list(checkpoints(5, 1)) == [1, 2, 3, 4, 5]
    assert decade_checkpoints(10**5) == [10, 100, 1000, 10**4, 10**5]
    assert decade_checkpoints(5) == [5]


# ---------------------------------------------------------------- run


def test_single_player_single_action_matches_environment_draws():
    cfg = ScenarioConfig("solo", [[[[0.2, 0.6]]]], [PlayerSpec("uniform", 1, (2.0,))], horizon=200, stride=1)
    tr = run(cfg, seed=4)
    model, spaces, norm, noise = cfg.model(), cfg.spaces(), cfg.normalizer(), cfg.noise()
    rng = RngStream(4, -1, "environment")
    want = []
    for _ in range(200):
        g = draw_gains(model, rng)
        u = expected_utility([0], g, model, spaces)
        want.append(float(np.clip(normalize(u, norm)[0] + noise.draw(rng, 1)[0], 0, 1)))
    assert np.array_equal(tr.rewards[:, 0], want)
    assert np.all(tr.profiles == 0)
    assert np.all(tr.internal_regret == 0) and np.all(tr.external_regret == 0)


def test_run_is_deterministic(tmp_path):
    cfg = short(kind="nr_bfpls")
    a, b = run(cfg, 1), run(cfg, 1)
    for name in ("profiles", "rewards", "avg_reward", "internal_regret"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    da, db = save_trace(a, tmp_path / "a"), save_trace(b, tmp_path / "b")
    for f in ("trace.csv", "joint.csv", "metadata.json"):
        assert (da / f).read_bytes() == (db / f).read_bytes()
    assert not np.array_equal(run(cfg, 2).profiles, a.profiles)


def test_trace_shapes():
    tr = run(short(horizon=520, stride=100), 0)
    assert list(tr.t) == [100, 200, 300, 400, 500, 520]
    assert tr.profiles.shape == (6, 2) and tr.strategies[0].shape == (6, 4)
    assert sorted(tr.joint) == [10, 100, 520]
    assert tr.joint[520].sum() == pytest.approx(1.0)
    assert tr.horizon == 520 and tr.at(300) == 2
    with pytest.raises(KeyError):
        tr.at(301)


def test_strategies_never_see_counterfactuals():
    cfg = short(kind="nr_bfpls", horizon=400)

    def corrupt(t, res):
        for cf in res.counterfactual:
            cf[:] = np.random.default_rng(t).random(cf.size)

    clean, dirty = run(cfg, 0), run(cfg, 0, observe=corrupt)
    assert np.array_equal(clean.profiles, dirty.profiles)
    assert all(np.array_equal(a, b) for a, b in zip(clean.strategies, dirty.strategies))
    assert np.array_equal(clean.rewards, dirty.rewards)
    # the measurement side did see the corruption
    assert not np.array_equal(clean.internal_regret, dirty.internal_regret)


def test_run_error_carries_trial():
    def boom(t, res):
        if t == 37:
            raise ValueError("injected")

    with pytest.raises(RunError) as info:
        run(short(), 3, observe=boom)
    assert info.value.trial == 37 and info.value.seed == 3
    assert "injected" in str(info.value)


def test_centralized_run_plays_the_planned_profile():
    tr = run(short(kind="centralized_optimal"), 0)
    assert np.all(tr.profiles == [1, 3])
    assert [m["action"] for m in tr.metadata["players"]] == [1, 3]


def test_metadata_records_defaults():
    tr = run(preset("part_one", "berts", {"T": 20}).replace(horizon=100, stride=10), 0)
    md = tr.metadata
    assert md["players"][0]["xi"] == 0.01 and md["players"][0]["s"] == 1
    assert md["scenario"]["reward"]["noise_half_width"] == 0.02
    assert md["ce_payoffs"].startswith("stationary proxy")
    md = run(short(kind="nr_bfpls", horizon=20), 0).metadata["players"][0]
    for key in ("eps", "gamma", "shift_coeff", "eps_role", "delta_floor", "start", "sigma_seed"):
        assert key in md


def test_stationary_variant_has_no_gain_randomness():
    cfg = short(horizon=300).replace(stationary=True, noise_half_width=0.0)
    tr = run(cfg, 0)
    U = normalize(expected_utility(tr.profiles[-1], cfg.model().midpoints(), cfg.model(), cfg.spaces()),
                  cfg.normalizer())
    assert np.allclose(tr.rewards[-1], U, atol=1e-15)


def test_external_regret_bounded_by_internal_on_traces():
    for kind in ("nr_bewas", "nr_bfpls", "uniform", "berts"):
        params = {"T": 40} if kind == "berts" else None
        tr = run(short(kind=kind, params=params, horizon=800), 0)
        bound = 4 * np.maximum(tr.internal_regret, 0)
        assert np.all(tr.external_regret <= bound + 1e-9)


def test_run_batch_matches_sequential():
    cfg = short(horizon=200)
    seq = run_batch(cfg)
    par = run_batch(cfg, workers=2)
    for a, b in zip(seq, par):
        assert np.array_equal(a.profiles, b.profiles)


# ---------------------------------------------------------------- io and report


def test_io_roundtrip(tmp_path):
    tr = run(preset("part_one", "berts", {"T": 20}).replace(horizon=200, stride=10), 5)
    back = load_trace(save_trace(tr, tmp_path))
    for name in ("t", "profiles", "rewards", "avg_reward", "external_regret", "internal_regret",
                 "realized_regret"):
        assert np.array_equal(getattr(tr, name), getattr(back, name))
    assert all(np.array_equal(a, b) for a, b in zip(tr.strategies, back.strategies))
    assert sorted(back.joint) == sorted(tr.joint)
    assert all(np.array_equal(tr.joint[n], back.joint[n]) for n in tr.joint)
    assert [[p.index for p in r] for r in back.berts] == [[p.index for p in r] for r in tr.berts]
    assert back.metadata["scenario"] == tr.metadata["scenario"]


def test_io_errors(tmp_path):
    with pytest.raises(TraceIOError):
        load_trace(tmp_path)
    with pytest.raises(TraceIOError):
        find_runs(tmp_path / "nothing")


def test_report_files(tmp_path):
    traces = [run(short(kind=k, params=p, horizon=300), s) for k, p in
              [("nr_bewas", None), ("uniform", None), ("berts", {"T": 20})] for s in (0, 1)]
    summary = report(traces, tmp_path)
    assert set(summary) == {"nr_bewas", "uniform", "berts"}
    rows = _read(tmp_path / "average_reward.csv")
    assert rows[0] == ["t", "berts", "nr_bewas", "uniform"]
    assert [int(r[0]) for r in rows[1:]] == list(range(50, 301, 50))
    ce = _read(tmp_path / "ce.csv")
    assert ce[0][:5] == ["label", "seed", "n", "ce_violation", "ce_distance"]
    assert len(ce) == 1 + 3 * 2 * 3  # decades 10, 100, 300
    berts = json.loads((tmp_path / "berts.json").read_text())
    assert len(berts) == 4 and all("accepted_periods" in b for b in berts)
    for f in ("regret.csv", "strategies.csv", "summary.json"):
        assert (tmp_path / f).exists()


def test_report_stride_one_gives_per_trial_rows(tmp_path):
    tr = run(short(horizon=30, stride=1), 0)
    report([tr], tmp_path)
    assert len(_read(tmp_path / "average_reward.csv")) == 31


def test_report_needs_traces(tmp_path):
    with pytest.raises(ValueError):
        report([], tmp_path)


# ---------------------------------------------------------------- cli


def test_cli_run_and_report(tmp_path, capsys):
    out = tmp_path / "runs"
    assert main(["run", "--preset", "part_one", "--seeds", "0..1", "--horizon", "200", "--stride", "20",
                 "--out", str(out), "--strategy", "nr_bfpls=start=uniform"]) == 0
    assert len(find_runs(out)) == 2
    assert load_config(out / "part_one.toml").players[0].params == {"start": "uniform"}
    assert main(["run", "--preset", "part_one", "--seeds", "0", "--horizon", "200", "--out", str(out),
                 "--strategy", "uniform", "--strategy", "eps_greedy=eps=0.2", "-v"]) == 0
    assert main(["report", "--in", str(out), "--out", str(tmp_path / "rep")]) == 0
    assert "nr_bfpls" in capsys.readouterr().out
    assert (tmp_path / "rep" / "summary.json").exists()


def test_cli_config_file(tmp_path):
    path = short(horizon=100).save(tmp_path / "s.toml")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert len(find_runs(tmp_path / "o")) == 2


@pytest.mark.parametrize("argv", [
    ["run", "--preset", "nope", "--out", "X"],
    ["run", "--preset", "part_one", "--out", "X", "--strategy", "a", "--strategy", "b", "--strategy", "c"],
    ["run", "--preset", "part_one", "--out", "X", "--horizon", "0"],
    ["run", "--preset", "part_one", "--out", "X", "--strategy", "nope"],
    ["report", "--in", "X/missing", "--out", "X/rep"],
])
def test_cli_errors_exit_nonzero(argv, tmp_path, capsys):
    argv = [a.replace("X", str(tmp_path)) for a in argv]
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err
