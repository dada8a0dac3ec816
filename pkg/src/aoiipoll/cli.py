"""Command-line front end: ``aoiipoll run | suite | reconstruct``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from .engine import SimConfig, run, run_replications
from .reconstruct import ReconstructionError, reconstruct_file
from .suites import DEFAULT_SEEDS, SUITES, format_rows, get_suite, run_suite, write_suite
from .world import TraceLoadError, ValidationError

log = logging.getLogger("aoiipoll")


def _seeds(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        seeds = [int(s) for s in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"--seeds expects integers, got {text!r}") from exc
    if not seeds:
        raise ValidationError("--seeds is empty")
    return seeds


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML or JSON config file")
    p.add_argument("--scenario", help="synthetic scenario: one, two or three")
    p.add_argument("--trace", help="sensor trace file (Intel lab layout)")
    p.add_argument("--policy", help="rr, aoi, kf, waoii, fwaoii or wiql")
    p.add_argument("--m", type=int, dest="M", help="nodes polled per step")
    p.add_argument("--lambda", type=float, dest="penalty", help="initial activation penalty")
    p.add_argument("--eta", help="fairness window in steps (or 'inf')")
    p.add_argument("--horizon", type=int, help="number of steps")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", help="comma separated seeds for replications")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verbose-index-dump", action="store_true", dest="index_dump",
                   help="also write per-step index snapshots to index.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aoiipoll", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="simulate one configuration")
    _common(p_run)

    p_suite = sub.add_parser("suite", help="run a built-in comparison suite")
    p_suite.add_argument("name", nargs="?", help=f"one of: {', '.join(SUITES)}")
    _common(p_suite)

    p_rec = sub.add_parser("reconstruct", help="offline spline reconstruction of one node")
    p_rec.add_argument("steps_csv")
    p_rec.add_argument("node", type=int)
    p_rec.add_argument("--out", default=None, help="output CSV (default: reconstruction_<node>.csv)")
    return parser


def resolve_config(args) -> SimConfig:
    cfg = cfgmod.load(args.config) if args.config else SimConfig()
    return cfgmod.apply_overrides(
        cfg, scenario=args.scenario, trace=args.trace, policy=args.policy, M=args.M,
        horizon=args.horizon, seed=args.seed, penalty=args.penalty, eta=args.eta,
        index_dump=args.index_dump or None,
    )


def _summary_table(s: dict) -> str:
    rows = [
        ("policy", s["policy"]), ("M / N", f"{s['M']} / {s['n_nodes']}"), ("horizon", s["horizon"]),
        ("polls", s["total_polls"]), ("packets", s["total_packets"]),
        ("deliveries", s["total_deliveries"]), ("mean AoII", f"{s['mean_aoii']:.4f}"),
        ("mean reward", f"{s['mean_reward']:.4f}"), ("RMSE", f"{s['rmse']:.4f}"),
        ("lifetime (years)", f"{s['lifetime_years']:.4f}"),
    ]
    if s.get("category_names"):
        share = ", ".join(f"{n}={p:.1f}%" for n, p in zip(s["category_names"], s["poll_share"]))
        rows.append(("poll share", share))
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    chash = cfgmod.config_hash(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = _seeds(args.seeds)
    if seeds and len(seeds) > 1:
        agg = run_replications(cfg, seeds, workers=args.workers)
        summary = {"config_hash": chash, "seeds": seeds, **agg}
        shown = agg["mean"]
        # per-step log of the first seed only; the rest are summarised
        res = run(cfgmod.apply_overrides(cfg, seed=seeds[0]))
    else:
        if seeds:
            cfg = cfgmod.apply_overrides(cfg, seed=seeds[0])
            chash = cfgmod.config_hash(cfg)
        res = run(cfg)
        shown = res.summary.to_dict()
        summary = {"config_hash": chash, **shown}
    res.log.write_csv(out / "steps.csv")
    if res.index_rows is not None:
        res.write_index_csv(out / "index.csv")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    cfgmod.dump(cfg, out / "config.yaml")
    print(_summary_table(shown))
    print(f"config hash {chash}; outputs in {out}")
    return 0


def cmd_suite(args) -> int:
    if not args.name:
        print("available suites:\n  " + "\n  ".join(SUITES))
        return 2
    cfg = resolve_config(args)
    suite = get_suite(args.name, horizon=cfg.horizon, base=cfg)
    seeds = _seeds(args.seeds) or list(DEFAULT_SEEDS)
    result = run_suite(suite, seeds=seeds, workers=args.workers)
    csv_path, json_path = write_suite(result, args.out, cfgmod.config_hash(cfg))
    print(format_rows(result["rows"]))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_reconstruct(args) -> int:
    out = args.out or f"reconstruction_{args.node}.csv"
    rec = reconstruct_file(args.steps_csv, args.node, out)
    print(f"node {args.node}: {rec['anchors']} anchors, online RMSE {rec['online_rmse']:.4f}, "
          f"offline RMSE {rec['offline_rmse']:.4f}")
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "suite": cmd_suite, "reconstruct": cmd_reconstruct}[args.cmd]
    try:
        return handler(args)
    except (ValidationError, TraceLoadError, ReconstructionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
