"""Trace persistence: one directory per run with CSV tables and a JSON metadata file."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..strategies.berts import PeriodRecord
from .run import RunTrace

FLOAT_FMT = "%.17g"  # round-trips doubles exactly


class TraceIOError(OSError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % x


def _write_csv(path: Path, header, rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    except OSError as e:
        raise TraceIOError(f"cannot write {path}: {e}") from e


def _read_csv(path: Path) -> tuple[list, list]:
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise TraceIOError(f"cannot read {path}: {e}") from e
    return rows[0], rows[1:]


def write_json(path: Path, obj) -> None:
    try:
        Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True, default=_json_default) + "\n")
    except OSError as e:
        raise TraceIOError(f"cannot write {path}: {e}") from e


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run_dir_name(trace: RunTrace) -> str:
    kinds = "+".join(sorted(set(trace.kinds)))
    return f"{kinds}__seed{trace.seed}"


def save_trace(trace: RunTrace, out_dir) -> Path:
    d = Path(out_dir) / run_dir_name(trace)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise TraceIOError(f"cannot create {d}: {e}") from e
    K = len(trace.kinds)
    header = ["t"]
    header += [f"action_{k}" for k in range(K)] + [f"reward_{k}" for k in range(K)]
    header += [f"avg_reward_{k}" for k in range(K)] + [f"external_regret_{k}" for k in range(K)]
    header += [f"internal_regret_{k}" for k in range(K)] + [f"realized_regret_{k}" for k in range(K)]
    for k, s in enumerate(trace.strategies):
        header += [f"p_{k}_{i}" for i in range(s.shape[1])]
    rows = []
    for r, t in enumerate(trace.t):
        row = [int(t)] + [int(a) for a in trace.profiles[r]] + list(trace.rewards[r]) + list(trace.avg_reward[r])
        row += list(trace.external_regret[r]) + list(trace.internal_regret[r]) + list(trace.realized_regret[r])
        for s in trace.strategies:
            row += list(s[r])
        rows.append(row)
    _write_csv(d / "trace.csv", header, rows)

    jrows = []
    for n, freq in sorted(trace.joint.items()):
        for prof in zip(*np.nonzero(freq)):
            jrows.append([int(n)] + [int(a) for a in prof] + [float(freq[prof])])
    _write_csv(d / "joint.csv", ["n"] + [f"action_{k}" for k in range(K)] + ["frequency"], jrows)

    meta = dict(trace.metadata)
    meta["kinds"] = list(trace.kinds)
    meta["joint_shape"] = [s.shape[1] for s in trace.strategies]
    meta["berts"] = [[{"index": p.index, "strategy": p.strategy, "experimental_regret": p.experimental_regret,
                       "accepted": p.accepted, "reset": p.reset} for p in recs] for recs in trace.berts]
    write_json(d / "metadata.json", meta)
    return d


def load_trace(run_dir) -> RunTrace:
    d = Path(run_dir)
    try:
        meta = json.loads((d / "metadata.json").read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise TraceIOError(f"cannot read {d / 'metadata.json'}: {e}") from e
    header, rows = _read_csv(d / "trace.csv")
    K = len(meta["kinds"])
    shape = tuple(meta["joint_shape"])
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
    col = {name: i for i, name in enumerate(header)}

    def block(prefix):
        return data[:, [col[f"{prefix}_{k}"] for k in range(K)]]

    strategies = [data[:, [col[f"p_{k}_{i}"] for i in range(shape[k])]] for k in range(K)]
    joint = {}
    _, jrows = _read_csv(d / "joint.csv")
    for r in jrows:
        n = int(r[0])
        arr = joint.setdefault(n, np.zeros(shape))
        arr[tuple(int(a) for a in r[1:1 + K])] = float(r[-1])
    berts = [[PeriodRecord(p["index"], np.array(p["strategy"]), np.array(p["experimental_regret"]),
                           p["accepted"], p["reset"]) for p in recs] for recs in meta.pop("berts")]
    kinds = meta.pop("kinds")
    meta.pop("joint_shape")
    return RunTrace(
        seed=int(meta["seed"]), kinds=kinds, t=data[:, col["t"]].astype(int),
        profiles=block("action").astype(int), rewards=block("reward"), avg_reward=block("avg_reward"),
        external_regret=block("external_regret"), internal_regret=block("internal_regret"),
        realized_regret=block("realized_regret"), strategies=strategies, joint=joint, berts=berts,
        metadata=meta,
    )


def find_runs(root) -> list:
    root = Path(root)
    if not root.is_dir():
        raise TraceIOError(f"{root} is not a directory")
    return sorted(p.parent for p in root.rglob("metadata.json") if (p.parent / "trace.csv").exists())
