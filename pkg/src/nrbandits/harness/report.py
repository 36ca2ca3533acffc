"""Summary tables over a batch of traces.

Files written to the output directory:

- average_reward.csv: t, then one column per strategy label (running average
  reward, averaged over players and seeds), aligned on common checkpoints
- regret.csv: label, t, mean external / internal regret and the median over
  seeds of internal regret per trial
- strategies.csv: mixed strategy of each player at decade checkpoints
- ce.csv: label, seed, n, ce_violation, ce_distance, max swap regret per player
  (payoffs are the stationary midpoint tensor, a proxy for the time-varying game)
- berts.csv / berts.json: accepted periods of every BERTS player
- summary.json: per-label digest
"""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

from ..env import stationary_payoff_tensor
from ..equilibrium import ce_distance, ce_violation
from .config import ScenarioConfig
from .io import TraceIOError, _write_csv, write_json

CE_DISTANCE_MAX_PROFILES = 1000  # larger games get ce_violation only, unless overridden


def label_of(trace) -> str:
    return "+".join(sorted(set(trace.kinds)))


def payoffs_of(trace) -> np.ndarray:
    cfg = ScenarioConfig.from_dict(trace.metadata["scenario"])
    return stationary_payoff_tensor(cfg.model(), cfg.spaces())


def _common_t(traces) -> np.ndarray:
    t = traces[0].t
    for tr in traces[1:]:
        t = np.intersect1d(t, tr.t)
    return t


def ce_rows(trace, payoffs=None, max_profiles: int = CE_DISTANCE_MAX_PROFILES) -> list:
    """[n, ce_violation, ce_distance, max swap regret of each player] per decade checkpoint."""
    U = payoffs_of(trace) if payoffs is None else payoffs
    rows = []
    for n, freq in sorted(trace.joint.items()):
        viol = ce_violation(freq, U)
        dist = ce_distance(freq, U) if freq.size <= max_profiles else float("nan")
        r = trace.at(n) if n in set(trace.t.tolist()) else None
        swap = list(trace.internal_regret[r]) if r is not None else [float("nan")] * len(trace.kinds)
        rows.append([int(n), viol, dist] + swap)
    return rows


def report(traces, out_dir, ce_max_profiles: int = CE_DISTANCE_MAX_PROFILES) -> dict:
    traces = list(traces)
    if not traces:
        raise ValueError("report needs at least one trace")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise TraceIOError(f"cannot create {out}: {e}") from e
    groups = defaultdict(list)
    for tr in traces:
        groups[label_of(tr)].append(tr)
    labels = sorted(groups)

    t = _common_t(traces)
    cols = []
    for lab in labels:
        per_seed = [tr.avg_reward[np.searchsorted(tr.t, t)].mean(axis=1) for tr in groups[lab]]
        cols.append(np.mean(per_seed, axis=0))
    _write_csv(out / "average_reward.csv", ["t"] + labels,
               [[int(ti)] + [c[i] for c in cols] for i, ti in enumerate(t)])

    rows = []
    for lab in labels:
        trs = groups[lab]
        tt = _common_t(trs)
        idx = [np.searchsorted(tr.t, tt) for tr in trs]
        ext = np.mean([tr.external_regret[i].mean(axis=1) for tr, i in zip(trs, idx)], axis=0)
        intr = np.array([tr.internal_regret[i].mean(axis=1) for tr, i in zip(trs, idx)])
        med = np.median(intr / tt[None, :], axis=0)
        for j, ti in enumerate(tt):
            rows.append([lab, int(ti), ext[j], intr[:, j].mean(), med[j]])
    _write_csv(out / "regret.csv", ["label", "t", "external_regret_mean", "internal_regret_mean",
                                    "internal_regret_per_trial_median"], rows)

    rows = []
    for lab in labels:
        for tr in groups[lab]:
            for n in sorted(tr.joint):
                if n not in set(tr.t.tolist()):
                    continue
                r = tr.at(n)
                for k, s in enumerate(tr.strategies):
                    rows.append([lab, tr.seed, k, int(n), " ".join("%.6f" % x for x in s[r])])
    _write_csv(out / "strategies.csv", ["label", "seed", "player", "t", "probs"], rows)

    rows, payoff_cache = [], {}
    for lab in labels:
        for tr in groups[lab]:
            key = repr(tr.metadata["scenario"].get("channel")) + repr(tr.metadata["scenario"].get("players"))
            if key not in payoff_cache:
                payoff_cache[key] = payoffs_of(tr)
            for r in ce_rows(tr, payoff_cache[key], ce_max_profiles):
                rows.append([lab, tr.seed] + r)
    K = len(traces[0].kinds)
    _write_csv(out / "ce.csv", ["label", "seed", "n", "ce_violation", "ce_distance"]
               + [f"max_swap_regret_{k}" for k in range(K)], rows)

    berts_rows, berts_json = [], []
    for lab in labels:
        for tr in groups[lab]:
            for k, recs in enumerate(tr.berts):
                if not recs:
                    continue
                acc = [p.index for p in recs if p.accepted]
                first = acc[0] if acc else -1
                berts_rows.append([lab, tr.seed, k, first, len(acc), len(recs)])
                berts_json.append({"label": lab, "seed": tr.seed, "player": k, "accepted_periods": acc,
                                   "max_accepted_regret": max((float(p.experimental_regret.max())
                                                               for p in recs if p.accepted), default=None)})
    if berts_rows:
        _write_csv(out / "berts.csv", ["label", "seed", "player", "first_accepted_period",
                                       "accepted_periods", "periods"], berts_rows)
        write_json(out / "berts.json", berts_json)

    summary = {}
    for lab in labels:
        trs = groups[lab]
        summary[lab] = {
            "seeds": [tr.seed for tr in trs],
            "horizon": int(trs[0].horizon),
            "final_avg_reward_mean": float(np.mean([tr.avg_reward[-1].mean() for tr in trs])),
            "final_strategies_mean": [np.mean([tr.strategies[k][-1] for tr in trs], axis=0).tolist()
                                      for k in range(len(trs[0].kinds))],
            "final_internal_regret_mean": float(np.mean([tr.internal_regret[-1].mean() for tr in trs])),
            "ce_payoffs": "stationary proxy (interval midpoints)",
        }
    write_json(out / "summary.json", summary)
    return summary
