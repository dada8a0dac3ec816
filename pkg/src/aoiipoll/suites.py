"""Built-in experiment suites that regenerate the comparison tables.

Every variation of a suite runs on the same seeds, so the round-robin run
for a given seed and world is the denominator of that seed's
"% of RR" packet figure.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .engine import SimConfig, run
from .world import ValidationError, scenario_three

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass
class Variation:
    name: str
    cfg: SimConfig
    group: dict = field(default_factory=dict)


@dataclass
class ExperimentSuite:
    name: str
    variations: list[Variation]
    table: callable

    def validate(self) -> None:
        if not self.variations:
            raise ValidationError(f"suite {self.name!r} has no variations")
        names = [v.name for v in self.variations]
        if len(set(names)) != len(names):
            raise ValidationError(f"suite {self.name!r} has duplicate variation names")


def phase_windows(horizon: int, reversal: int) -> tuple[tuple[int, int], ...]:
    """Before the reversal, a settling tenth of the horizon, and the remainder."""
    settle = min(horizon, reversal + horizon // 10)
    return ((0, reversal), (reversal, settle), (settle, horizon))


def phase_shares(result, category: int = 1, windows=None) -> dict:
    """Share of polls going to ``category`` inside each step window."""
    if windows is None:
        spec = result.config.scenario_spec()
        windows = phase_windows(result.log.horizon, spec.reversal_time)
    cats = result.truth.categories
    act = result.log.action
    out = {}
    for lo, hi in windows:
        hi = min(hi, act.shape[0])
        polls = act[lo:hi].sum(axis=0)
        total = polls.sum()
        out[f"{lo}-{hi}"] = float(100.0 * polls[cats == category].sum() / total) if total else 0.0
    return out


def _run_one(args) -> dict:
    name, cfg = args
    res = run(cfg)
    d = res.summary.to_dict()
    d["variation"] = name
    spec = cfg.scenario_spec() if cfg.trace is None else None
    if spec is not None and spec.reversal_time is not None:
        d["phase_share_B"] = phase_shares(res)
    return d


def _stats(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return float(v.mean()), sd


def _cell(values) -> str:
    m, s = _stats(values)
    return f"{m:.4g} ± {s:.2g}"


def _pct_of_rr(runs, variation, rr_variation, seeds):
    return [
        100.0 * runs[(variation, s)]["total_packets"] / runs[(rr_variation, s)]["total_packets"]
        for s in seeds
    ]


# --- suite definitions ---------------------------------------------------------


def _base(horizon: int, **kw) -> SimConfig:
    return SimConfig(horizon=horizon, **kw)


def table2_m_sweep(horizon=10_000, base: SimConfig | None = None) -> ExperimentSuite:
    base = base or _base(horizon)
    vs = []
    for M in (1, 2, 5, 10):
        for pol in ("rr", "waoii", "kf", "aoi"):
            vs.append(Variation(f"{pol}_M{M}", replace(base, M=M, policy=pol), {"M": M, "policy": pol}))

    def table(runs, seeds):
        rows = []
        for M in (1, 2, 5, 10):
            row = {"M": M}
            for pol in ("waoii", "kf", "aoi"):
                row[f"{pol}_pct_rr"] = _stats(_pct_of_rr(runs, f"{pol}_M{M}", f"rr_M{M}", seeds))
            for pol in ("waoii", "kf"):
                row[f"{pol}_rmse"] = _stats([runs[(f"{pol}_M{M}", s)]["rmse"] for s in seeds])
            rows.append(row)
        return rows

    return ExperimentSuite("table2_m_sweep", vs, table)


def table3_penalty_sweep(horizon=10_000, base: SimConfig | None = None, M: int = 5) -> ExperimentSuite:
    base = base or _base(horizon)
    lams = (0.1, 0.25, 0.5)
    vs = []
    for lam in lams:
        cfg = replace(base, M=M, whittle=replace(base.whittle, penalty=lam))
        for pol in ("rr", "waoii", "kf", "aoi"):
            vs.append(Variation(f"{pol}_lam{lam}", replace(cfg, policy=pol), {"penalty": lam, "policy": pol}))

    def table(runs, seeds):
        rows = []
        for lam in lams:
            row = {"penalty": lam}
            for pol in ("waoii", "kf", "aoi"):
                row[f"{pol}_pct_rr"] = _stats(_pct_of_rr(runs, f"{pol}_lam{lam}", f"rr_lam{lam}", seeds))
            for pol in ("waoii", "kf"):
                row[f"{pol}_rmse"] = _stats([runs[(f"{pol}_lam{lam}", s)]["rmse"] for s in seeds])
            rows.append(row)
        return rows

    return ExperimentSuite("table3_penalty_sweep", vs, table)


def table4_eta_sweep(horizon=10_000, base: SimConfig | None = None, M: int = 1) -> ExperimentSuite:
    base = base or _base(horizon)
    etas = (100, 300, 500)
    vs = [
        Variation(f"fwaoii_eta{eta}", replace(base, M=M, policy="fwaoii",
                                              whittle=replace(base.whittle, eta=float(eta))), {"eta": eta})
        for eta in etas
    ]

    def table(runs, seeds):
        rows = []
        for eta in etas:
            rs = [runs[(f"fwaoii_eta{eta}", s)] for s in seeds]
            for k, cat in enumerate(rs[0]["category_names"]):
                rows.append({
                    "eta": eta, "category": cat,
                    "polls": _stats([r["polls_per_category"][k] for r in rs]),
                    "pct": _stats([r["poll_share"][k] for r in rs]),
                    "rmse": _stats([r["rmse"] for r in rs]),
                })
        return rows

    return ExperimentSuite("table4_eta_sweep", vs, table)


LIFETIME_POLICIES = (
    ("rr", "rr", math.inf), ("aoi", "aoi", math.inf), ("waoii", "waoii", math.inf),
    ("fwaoii_eta200", "fwaoii", 200.0), ("fwaoii_eta100", "fwaoii", 100.0),
)


def table5_lifetime(horizon=10_000, base: SimConfig | None = None) -> ExperimentSuite:
    base = base or _base(horizon)
    vs = []
    for M in (1, 2, 5, 10):
        for label, pol, eta in LIFETIME_POLICIES:
            cfg = replace(base, M=M, policy=pol, whittle=replace(base.whittle, eta=eta))
            vs.append(Variation(f"{label}_M{M}", cfg, {"M": M, "policy": label}))

    def table(runs, seeds):
        rows = []
        for M in (1, 2, 5, 10):
            row = {"M": M}
            for label, _, _ in LIFETIME_POLICIES:
                row[f"{label}_years"] = _stats([runs[(f"{label}_M{M}", s)]["lifetime_years"] for s in seeds])
            rows.append(row)
        return rows

    return ExperimentSuite("table5_lifetime", vs, table)


def fig_scenario3_adaptation(horizon=10_000, base: SimConfig | None = None, M: int = 1) -> ExperimentSuite:
    base = base or _base(horizon)
    reversal = 5_000 if horizon > 5_000 else horizon // 2
    base = replace(base, scenario=scenario_three(horizon, reversal_time=reversal), M=M)
    vs = [
        Variation("waoii", replace(base, policy="waoii"), {"policy": "waoii"}),
        Variation("fwaoii_eta100", replace(base, policy="fwaoii",
                                           whittle=replace(base.whittle, eta=100.0)), {"policy": "fwaoii"}),
    ]

    def table(runs, seeds):
        rows = []
        for v in vs:
            shares = [runs[(v.name, s)]["phase_share_B"] for s in seeds]
            row = {"policy": v.name}
            for window in shares[0]:
                row[f"share_B_{window}"] = _stats([sh[window] for sh in shares])
            rows.append(row)
        return rows

    return ExperimentSuite("fig_scenario3_adaptation", vs, table)


def fig9_reward_comparison(horizon=10_000, base: SimConfig | None = None) -> ExperimentSuite:
    base = base or _base(horizon)
    pols = ("waoii", "wiql", "aoi", "rr")
    vs = [
        Variation(f"{pol}_M{M}", replace(base, M=M, policy=pol), {"M": M, "policy": pol})
        for M in (1, 5, 10) for pol in pols
    ]

    def table(runs, seeds):
        rows = []
        for M in (1, 5, 10):
            row = {"M": M}
            for pol in pols:
                row[f"{pol}_reward"] = _stats([runs[(f"{pol}_M{M}", s)]["mean_reward"] for s in seeds])
            rows.append(row)
        return rows

    return ExperimentSuite("fig9_reward_comparison", vs, table)


SUITES = {
    "table2_m_sweep": table2_m_sweep,
    "table3_penalty_sweep": table3_penalty_sweep,
    "table4_eta_sweep": table4_eta_sweep,
    "table5_lifetime": table5_lifetime,
    "fig_scenario3_adaptation": fig_scenario3_adaptation,
    "fig9_reward_comparison": fig9_reward_comparison,
}


def get_suite(name: str, **kw) -> ExperimentSuite:
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
    return SUITES[name](**kw)


def run_suite(suite: ExperimentSuite, seeds=DEFAULT_SEEDS, workers: int = 1) -> dict:
    suite.validate()
    seeds = list(seeds)
    jobs = [(v.name, replace(v.cfg, seed=s)) for v in suite.variations for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    runs = {(name, cfg.seed): res for (name, cfg), res in zip(jobs, results)}
    return {"suite": suite.name, "seeds": seeds, "rows": suite.table(runs, seeds), "runs": runs}


def _flatten(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, tuple):
            out[f"{k}_mean"], out[f"{k}_sd"] = v
        else:
            out[k] = v
    return out


def write_suite(result: dict, out_dir: str | Path, config_hash: str = "") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [_flatten(r) for r in result["rows"]]
    csv_path = out_dir / f"suite_{result['suite']}.csv"
    json_path = out_dir / f"suite_{result['suite']}.json"
    keys = list(dict.fromkeys(k for r in rows for k in r))
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    payload = {
        "suite": result["suite"], "seeds": result["seeds"], "config_hash": config_hash,
        "rows": rows,
        "runs": [dict(r) for _, r in sorted(result["runs"].items())],
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    return csv_path, json_path


def format_rows(rows: list[dict]) -> str:
    lines = []
    for r in rows:
        parts = [f"{k}={_cell(v) if isinstance(v, tuple) and len(v) == 2 and not isinstance(v[0], str) else v}"
                 for k, v in r.items()]
        lines.append("  ".join(parts))
    return "\n".join(lines)
