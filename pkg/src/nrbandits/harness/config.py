"""Scenario description, loaded from and saved to TOML.

A scenario file looks like::

    schema = 1
    name = "part_one"
    horizon = 100000
    seeds = [0, 1, 2]
    stride = 100

    [channel]
    noise_variance = 0.1
    price = 0.001
    gains = [...]              # (C, K, K, 2) nested list, or
    gains_fixture = "part_two_gains.json"

    [reward]
    g_min = -10.0
    g_max = 10.0
    noise_half_width = 0.02

    [[players]]
    kind = "nr_bewas"
    channels = 2
    power_levels = [1.0, 5.0]
    params = {}
"""
from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..core import ActionSpace, ConfigError
from ..env import ChannelModel, NoiseModel, RewardNormalizer
from ..strategies import CENTRALIZED, KINDS

SCHEMA_VERSION = 1
DEFAULT_STRIDE = 100


@dataclass
class PlayerSpec:
    kind: str
    channels: int
    power_levels: tuple
    params: dict = field(default_factory=dict)

    def space(self) -> ActionSpace:
        return ActionSpace(self.channels, tuple(float(x) for x in self.power_levels))


def load_fixture(name: str) -> np.ndarray:
    """Gain intervals stored with the package, shape (C, K, K, 2)."""
    try:
        text = resources.files("nrbandits.harness").joinpath("fixtures").joinpath(name).read_text()
    except FileNotFoundError as e:
        raise ConfigError(f"unknown gain fixture {name!r}") from e
    return np.asarray(json.loads(text)["gain_intervals"], dtype=float)


@dataclass
class ScenarioConfig:
    name: str
    gain_intervals: np.ndarray
    players: list
    horizon: int
    seeds: list = field(default_factory=lambda: [0])
    stride: int = DEFAULT_STRIDE
    noise_variance: float = 0.1
    price: float = 1e-3
    g_min: float = -10.0
    g_max: float = 10.0
    noise_half_width: float = 0.02
    stationary: bool = False  # gains fixed at interval midpoints every trial
    gains_fixture: str | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gain_intervals = np.asarray(self.gain_intervals, dtype=float)
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 1:
            raise ConfigError("horizon must be an integer >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if not self.players:
            raise ConfigError("at least one player is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        g = self.gain_intervals
        K = len(self.players)
        if g.ndim != 4 or g.shape[1:] != (K, K, 2):
            raise ConfigError(f"gain intervals have shape {g.shape}, expected (C, {K}, {K}, 2)")
        kinds = [p.kind for p in self.players]
        for k in kinds:
            if k not in KINDS:
                raise ConfigError(f"unknown strategy kind {k!r}")
        if any(k in CENTRALIZED for k in kinds) and len(set(kinds)) > 1:
            raise ConfigError("a centralized kind must be assigned to every player")
        for k, p in enumerate(self.players):
            if p.channels > g.shape[0]:
                raise ConfigError(f"player {k} uses {p.channels} channels, gains cover {g.shape[0]}")
        # build once so domain errors surface as configuration errors
        try:
            self.model()
            self.spaces()
            self.normalizer()
            self.noise()
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def model(self) -> ChannelModel:
        m = ChannelModel(self.gain_intervals, self.noise_variance, self.price)
        return m.stationary() if self.stationary else m

    def spaces(self) -> list:
        return [p.space() for p in self.players]

    def normalizer(self) -> RewardNormalizer:
        return RewardNormalizer(self.g_min, self.g_max)

    def noise(self) -> NoiseModel:
        return NoiseModel(self.noise_half_width)

    @property
    def num_players(self) -> int:
        return len(self.players)

    def with_strategy(self, kind: str, params: dict | None = None, player: int | None = None) -> "ScenarioConfig":
        """Copy with ``kind`` assigned to one player (or all of them)."""
        cfg = copy.deepcopy(self)
        targets = range(cfg.num_players) if player is None else [player]
        for k in targets:
            cfg.players[k].kind = kind
            cfg.players[k].params = dict(params or {})
        cfg.validate()
        return cfg

    def replace(self, **changes) -> "ScenarioConfig":
        cfg = copy.deepcopy(self)
        for key, value in changes.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown scenario field {key!r}")
            setattr(cfg, key, value)
        cfg.__post_init__()
        return cfg

    # serialization

    def to_dict(self) -> dict:
        channel = {"noise_variance": self.noise_variance, "price": self.price}
        if self.gains_fixture:
            channel["gains_fixture"] = self.gains_fixture
        else:
            channel["gains"] = self.gain_intervals.tolist()
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "horizon": int(self.horizon),
            "seeds": [int(s) for s in self.seeds],
            "stride": int(self.stride),
            "stationary": bool(self.stationary),
            "channel": channel,
            "reward": {"g_min": self.g_min, "g_max": self.g_max, "noise_half_width": self.noise_half_width},
            "players": [
                {"kind": p.kind, "channels": p.channels, "power_levels": [float(x) for x in p.power_levels],
                 "params": dict(p.params)}
                for p in self.players
            ],
            "notes": dict(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = copy.deepcopy(d)
        schema = d.pop("schema", None)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema version {schema!r} (expected {SCHEMA_VERSION})")
        try:
            channel = d.pop("channel")
            reward = d.pop("reward", {})
            players = [PlayerSpec(p["kind"], int(p["channels"]), tuple(p["power_levels"]), dict(p.get("params", {})))
                       for p in d.pop("players")]
            fixture = channel.pop("gains_fixture", None)
            gains = load_fixture(fixture) if fixture else channel.pop("gains")
            cfg = cls(
                name=d.pop("name"),
                gain_intervals=gains,
                players=players,
                horizon=int(d.pop("horizon")),
                seeds=[int(s) for s in d.pop("seeds", [0])],
                stride=int(d.pop("stride", DEFAULT_STRIDE)),
                stationary=bool(d.pop("stationary", False)),
                noise_variance=float(channel.pop("noise_variance", 0.1)),
                price=float(channel.pop("price", 1e-3)),
                g_min=float(reward.pop("g_min", -10.0)),
                g_max=float(reward.pop("g_max", 10.0)),
                noise_half_width=float(reward.pop("noise_half_width", 0.02)),
                gains_fixture=fixture,
                notes=dict(d.pop("notes", {})),
            )
        except KeyError as e:
            raise ConfigError(f"missing scenario field {e.args[0]!r}") from e
        leftover = sorted(d) + sorted(f"channel.{k}" for k in channel) + sorted(f"reward.{k}" for k in reward)
        if leftover:
            raise ConfigError(f"unknown scenario fields: {leftover}")
        return cfg

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_toml())
        return path


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return ScenarioConfig.from_dict(data)


def parse_seeds(text: str) -> list[int]:
    """'3' -> [3]; '0..9' -> [0, ..., 9] (inclusive); '1,4,7' -> [1, 4, 7]."""
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ConfigError(f"empty seed range {text!r}")
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"bad seed list {text!r}") from e


def parse_strategy(text: str) -> tuple[str, dict]:
    """'nr_bfpls', 'eps_greedy=eps=0.2' or 'berts=T=80,rho=0.16' -> (kind, params)."""
    kind, _, rest = text.partition("=")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"bad strategy parameter {item!r} (expected key=value)")
        params[key.strip()] = _parse_value(value.strip())
    return kind.strip(), params


def _parse_value(v: str):
    low = v.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v
