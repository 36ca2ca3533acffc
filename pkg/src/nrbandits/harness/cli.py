"""Command-line entry point: ``nrbandits run | report | verify``."""
from __future__ import annotations

import argparse
import logging
import subprocess
import sys
from pathlib import Path

from ..core import CapacityError, ConfigError, DomainError, SolverError
from .config import load_config, parse_seeds, parse_strategy
from .io import TraceIOError, find_runs, load_trace, save_trace
from .presets import preset
from .report import report
from .run import RunError, run

log = logging.getLogger("nrbandits")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nrbandits", description="Decentralized channel/power selection simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="simulate a scenario and write traces")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario TOML file")
    src.add_argument("--preset", help="part_one or part_two")
    r.add_argument("--seeds", help="'a..b' (inclusive), 'a,b,c' or a single seed")
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--strategy", action="append", default=[],
                   help="NAME or NAME=key=value,... ; give once for all players or once per player")
    r.add_argument("--horizon", type=int)
    r.add_argument("--stride", type=int)
    r.add_argument("--stationary", action="store_true", help="fix gains at interval midpoints")

    p = sub.add_parser("report", parents=[common], help="summarize traces written by 'run'")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("pytest_args", nargs="*", help="extra arguments for pytest")
    return ap


def _scenario(args):
    cfg = load_config(args.config) if args.config else preset(args.preset)
    changes = {}
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.stride is not None:
        changes["stride"] = args.stride
    if args.seeds:
        changes["seeds"] = parse_seeds(args.seeds)
    if args.stationary:
        changes["stationary"] = True
    if changes:
        cfg = cfg.replace(**changes)
    specs = [parse_strategy(s) for s in args.strategy]
    if len(specs) == 1:
        cfg = cfg.with_strategy(*specs[0])
    elif specs:
        if len(specs) != cfg.num_players:
            raise ConfigError(f"{len(specs)} --strategy flags for {cfg.num_players} players")
        for k, (kind, params) in enumerate(specs):
            cfg = cfg.with_strategy(kind, params, player=k)
    return cfg


def cmd_run(args) -> int:
    cfg = _scenario(args)
    args.out.mkdir(parents=True, exist_ok=True)
    cfg.save(args.out / f"{cfg.name}.toml")
    for seed in cfg.seeds:
        tr = run(cfg, seed)
        d = save_trace(tr, args.out)
        log.info("seed %d: %d trials in %.1f s -> %s", seed, cfg.horizon, tr.elapsed, d)
    return 0


def cmd_report(args) -> int:
    dirs = find_runs(args.inp)
    if not dirs:
        raise TraceIOError(f"no traces under {args.inp}")
    summary = report([load_trace(d) for d in dirs], args.out)
    for lab, s in summary.items():
        print(f"{lab}: seeds={len(s['seeds'])} final average reward={s['final_avg_reward_mean']:.4f}")
    return 0


def cmd_verify(args) -> int:
    root = Path(__file__).resolve().parents[3]
    suite = root / "tests" / "test_acceptance.py"
    if not suite.exists():
        raise TraceIOError(f"acceptance suite not found at {suite} (verify needs a source checkout)")
    cmd = [sys.executable, "-m", "pytest", str(suite), "-s", "-q", *args.pytest_args]
    return subprocess.call(cmd, cwd=root)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handlers = {"run": cmd_run, "report": cmd_report, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except RunError as e:
        print(f"error: run aborted at {e}", file=sys.stderr)
    except (ConfigError, DomainError, SolverError, CapacityError, TraceIOError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
