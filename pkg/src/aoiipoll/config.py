"""Loading, overriding, serialising and hashing simulation configs.

Config files are YAML (or JSON) with one section per subsystem::

    engine:     {M: 2, horizon: 10000, seed: 42}
    world:      {scenario: one}            # or {trace: {path: ..., value_kind: temperature}}
    estimation: {beta1: 0.5, beta2: 0.2, beta3: 0.1, pdr_window: 20}
    channel:    {pdr: 0.9, r_max: 3, wakeup_reliability: 1.0}
    whittle:    {penalty: 0.5, eta: .inf, use_pdr_weighting: true}
    policy:     {name: waoii, params: {}}
    energy:     {e_tx: 50, e_sense: 10, e_wake: 10, e_sleep: 1, e_max: 162000000}
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, fields, replace
from pathlib import Path

import yaml

from .channel import LinkModel
from .engine import EstimationConfig, SimConfig
from .metrics import EnergyModel
from .whittle import WhittleConfig
from .world import CategorySpec, ScenarioSpec, TraceSpec, ValidationError

SECTIONS = ("engine", "world", "estimation", "channel", "whittle", "policy", "energy")


def _take(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"[{section}] unknown keys: {sorted(unknown)}")
    return cls(**data)


def _eta(v):
    if v is None or (isinstance(v, str) and v.lower() in ("inf", "infinity", ".inf")):
        return math.inf
    return float(v)


def from_dict(data: dict) -> SimConfig:
    data = dict(data or {})
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    eng = dict(data.get("engine", {}))
    world = dict(data.get("world", {}))
    policy = dict(data.get("policy", {}))

    scenario = world.get("scenario", "one")
    if isinstance(scenario, dict):
        cats = tuple(_take(CategorySpec, c, "world.categories") for c in scenario.get("categories", []))
        scenario = ScenarioSpec(
            categories=cats,
            horizon=int(scenario.get("horizon", eng.get("horizon", 10_000))),
            reversal_time=scenario.get("reversal_time"),
            name=scenario.get("name", "custom"),
        )
    trace = world.get("trace")
    if trace is not None:
        trace = dict(trace)
        if trace.get("nodes") is not None:
            trace["nodes"] = tuple(trace["nodes"])
        trace = _take(TraceSpec, trace, "world.trace")
        scenario = None

    wh = dict(data.get("whittle", {}))
    if "eta" in wh:
        wh["eta"] = _eta(wh["eta"])
    ch = dict(data.get("channel", {}))
    if isinstance(ch.get("pdr"), list):
        ch["pdr"] = tuple(ch["pdr"])

    kwargs = {}
    for key in ("M", "horizon", "seed"):
        if key in eng:
            kwargs[key] = int(eng.pop(key))
    if "index_dump" in eng:
        kwargs["index_dump"] = bool(eng.pop("index_dump"))
    if eng:
        raise ValidationError(f"[engine] unknown keys: {sorted(eng)}")

    return SimConfig(
        policy=policy.get("name", "waoii"),
        policy_params=dict(policy.get("params", {}) or {}),
        scenario=scenario,
        trace=trace,
        whittle=_take(WhittleConfig, wh, "whittle"),
        link=_take(LinkModel, ch, "channel"),
        energy=_take(EnergyModel, dict(data.get("energy", {})), "energy"),
        estimation=_take(EstimationConfig, dict(data.get("estimation", {})), "estimation"),
        **kwargs,
    )


def to_dict(cfg: SimConfig) -> dict:
    world: dict = {}
    if cfg.trace is not None:
        tr = asdict(cfg.trace)
        if tr["nodes"] is not None:
            tr["nodes"] = list(tr["nodes"])
        world["trace"] = tr
    elif isinstance(cfg.scenario, ScenarioSpec):
        sc = cfg.scenario
        world["scenario"] = {
            "name": sc.name, "horizon": sc.horizon, "reversal_time": sc.reversal_time,
            "categories": [asdict(c) for c in sc.categories],
        }
    else:
        world["scenario"] = cfg.scenario
    wh = asdict(cfg.whittle)
    if math.isinf(wh["eta"]):
        wh["eta"] = "inf"
    ch = asdict(cfg.link)
    if isinstance(ch["pdr"], tuple):
        ch["pdr"] = list(ch["pdr"])
    return {
        "engine": {"M": cfg.M, "horizon": cfg.horizon, "seed": cfg.seed, "index_dump": cfg.index_dump},
        "world": world,
        "estimation": asdict(cfg.estimation),
        "channel": ch,
        "whittle": wh,
        "policy": {"name": cfg.policy, "params": dict(cfg.policy_params)},
        "energy": asdict(cfg.energy),
    }


def load(path: str | Path) -> SimConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ValidationError(f"{path}:{mark.line + 1}:{mark.column + 1}: {exc.problem}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def dump(cfg: SimConfig, path: str | Path | None = None) -> str:
    text = yaml.safe_dump(to_dict(cfg), sort_keys=True)
    if path is not None:
        Path(path).write_text(text)
    return text


def config_hash(cfg: SimConfig) -> str:
    canon = json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def apply_overrides(cfg: SimConfig, **ov) -> SimConfig:
    """Apply flag-style overrides; ``None`` values are ignored."""
    ov = {k: v for k, v in ov.items() if v is not None}
    if "scenario" in ov:
        cfg = replace(cfg, scenario=ov.pop("scenario"), trace=None)
    if "trace" in ov:
        tr = ov.pop("trace")
        cfg = replace(cfg, trace=tr if isinstance(tr, TraceSpec) else TraceSpec(path=str(tr)), scenario=None)
    if "policy" in ov:
        cfg = replace(cfg, policy=ov.pop("policy"))
    if "M" in ov:
        cfg = replace(cfg, M=int(ov.pop("M")))
    if "horizon" in ov:
        h = int(ov.pop("horizon"))
        sc = cfg.scenario
        if isinstance(sc, ScenarioSpec):
            sc = replace(sc, horizon=h)
        cfg = replace(cfg, horizon=h, scenario=sc)
    if "seed" in ov:
        cfg = replace(cfg, seed=int(ov.pop("seed")))
    if "penalty" in ov:
        cfg = replace(cfg, whittle=replace(cfg.whittle, penalty=float(ov.pop("penalty"))))
    if "eta" in ov:
        cfg = replace(cfg, whittle=replace(cfg.whittle, eta=_eta(ov.pop("eta"))))
    if "index_dump" in ov:
        cfg = replace(cfg, index_dump=bool(ov.pop("index_dump")))
    if ov:
        raise ValidationError(f"unknown overrides: {sorted(ov)}")
    return cfg
