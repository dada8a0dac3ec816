"""Discrete-time polling simulation.

Within a step the order is: sense, encode, record the sink's pre-decision
belief, decide, poll, install delivered vectors. Step 0 only initialises the
encoders and the sink's handshake record; polling rounds start at step 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .channel import LinkModel, PollOutcome, poll_from_uniforms
from .estimation import NodeEncoderState, PdrWindow, SinkRecord, encode, extrapolate
from .metrics import EnergyModel
from .policies import POLICIES, FairWhittleAoII, SinkView, make_policy
from .whittle import WhittleConfig, fairness_loss_bound
from .world import (
    CHANNEL_STREAM,
    POLICY_STREAM,
    GroundTruth,
    ScenarioSpec,
    TraceSpec,
    ValidationError,
    generate_synthetic,
    load_trace,
    node_rng,
    scenario_by_name,
)

STEPS_CSV_HEADER = (
    "t", "node", "action", "success", "aoii", "truth", "estimate_x1",
    "attempts", "index", "penalty", "u", "x2", "rx_x1", "rx_x2",
)
INDEX_CSV_HEADER = ("t", "node", "W", "c", "fairness_flag")


@dataclass
class EstimationConfig:
    beta1: float = 0.5
    beta2: float = 0.2
    beta3: float = 0.1
    pdr_window: int = 20
    dt: float = 1.0


@dataclass
class SimConfig:
    M: int = 1
    horizon: int = 10_000
    seed: int = 0
    policy: str = "waoii"
    policy_params: dict = field(default_factory=dict)
    scenario: str | ScenarioSpec | None = "one"
    trace: TraceSpec | None = None
    whittle: WhittleConfig = field(default_factory=WhittleConfig)
    link: LinkModel = field(default_factory=LinkModel)
    energy: EnergyModel = field(default_factory=EnergyModel)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    index_dump: bool = False

    def scenario_spec(self) -> ScenarioSpec | None:
        if self.trace is not None:
            return None
        if isinstance(self.scenario, ScenarioSpec):
            return self.scenario
        return scenario_by_name(self.scenario, self.horizon)

    def validate(self, n_nodes: int | None = None) -> None:
        """Collect every problem before raising, so one run reports all of them."""
        problems = []
        if self.M < 1:
            problems.append(f"M must be >= 1, got {self.M}")
        if self.horizon < 1:
            problems.append(f"horizon must be >= 1, got {self.horizon}")
        if self.policy not in POLICIES:
            problems.append(f"unknown policy {self.policy!r}; choose from {sorted(POLICIES)}")
        if self.trace is None and self.scenario is None:
            problems.append("either a scenario or a trace is required")
        est = self.estimation
        if not (0 < est.beta1 < 1 and 0 < est.beta2 < 1):
            problems.append("beta1 and beta2 must lie in (0, 1)")
        if not 0 <= est.beta3 <= 1:
            problems.append("beta3 must lie in [0, 1]")
        if est.pdr_window < 1:
            problems.append("pdr_window must be >= 1")
        if n_nodes is not None:
            if self.M > n_nodes:
                problems.append(f"M={self.M} exceeds the number of nodes N={n_nodes}")
            if np.ndim(self.link.pdr) and len(self.link.pdr) != n_nodes:
                problems.append(f"link.pdr has {len(self.link.pdr)} entries for {n_nodes} nodes")
        if problems:
            raise ValidationError("; ".join(problems))


def build_world(cfg: SimConfig) -> GroundTruth:
    if cfg.trace is not None:
        truth = load_trace(cfg.trace)
        if truth.horizon > cfg.horizon:
            truth.values = truth.values[:, : cfg.horizon]
        return truth
    return generate_synthetic(cfg.scenario_spec(), cfg.seed)


@dataclass
class StepLog:
    """Per-step, per-node arrays of shape (T, N); ``penalty`` is per step."""

    action: np.ndarray
    success: np.ndarray
    attempts: np.ndarray
    woke: np.ndarray
    aoii: np.ndarray
    truth: np.ndarray
    estimate: np.ndarray
    index: np.ndarray
    penalty: np.ndarray
    u: np.ndarray
    x2: np.ndarray
    rx_x1: np.ndarray
    rx_x2: np.ndarray

    @classmethod
    def empty(cls, T: int, N: int) -> "StepLog":
        f = lambda: np.full((T, N), np.nan)
        return cls(
            action=np.zeros((T, N), dtype=bool), success=np.zeros((T, N), dtype=bool),
            attempts=np.zeros((T, N), dtype=np.int16), woke=np.zeros((T, N), dtype=bool),
            aoii=f(), truth=f(), estimate=f(), index=f(), penalty=np.full(T, np.nan),
            u=np.zeros((T, N), dtype=np.int64), x2=f(), rx_x1=f(), rx_x2=f(),
        )

    @property
    def horizon(self) -> int:
        return self.action.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.action.shape[1]

    def decisions(self) -> list[tuple[int, ...]]:
        return [tuple(np.flatnonzero(row)) for row in self.action]

    def write_csv(self, path_or_buffer) -> None:
        own = isinstance(path_or_buffer, (str, Path))
        fh = open(path_or_buffer, "w", newline="") if own else path_or_buffer
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STEPS_CSV_HEADER)
            fmt = lambda v: "" if math.isnan(v) else repr(float(v))
            for t in range(self.horizon):
                pen = fmt(self.penalty[t])
                for i in range(self.n_nodes):
                    w.writerow((
                        t, i, int(self.action[t, i]), int(self.success[t, i]),
                        fmt(self.aoii[t, i]), fmt(self.truth[t, i]), fmt(self.estimate[t, i]),
                        int(self.attempts[t, i]), fmt(self.index[t, i]), pen,
                        int(self.u[t, i]), fmt(self.x2[t, i]),
                        fmt(self.rx_x1[t, i]), fmt(self.rx_x2[t, i]),
                    ))
        finally:
            if own:
                fh.close()

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass
class RunSummary:
    policy: str
    M: int
    n_nodes: int
    horizon: int
    seed: int
    polls: list[int]
    deliveries: list[int]
    packets: list[int]
    total_polls: int
    total_packets: int
    total_deliveries: int
    mean_aoii: float
    mean_reward: float
    rmse_per_node: list[float]
    rmse: float
    lifetime_steps: float
    lifetime_years: float
    category_names: list[str] = field(default_factory=list)
    polls_per_category: list[int] = field(default_factory=list)
    poll_share: list[float] = field(default_factory=list)
    fairness_overflows: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(log: StepLog, cfg: SimConfig, truth: GroundTruth, overflows: int = 0) -> RunSummary:
    T, N = log.horizon, log.n_nodes
    polls = log.action.sum(axis=0)
    packets = log.attempts.sum(axis=0).astype(int)
    deliveries = log.success.sum(axis=0)
    per_step_cost = [
        metrics.step_cost(log.aoii[t], log.action[t], cfg.whittle.penalty) for t in range(T)
    ]
    err = log.truth - log.estimate
    rmse_nodes = [metrics.rmse(log.truth[:, i], log.estimate[:, i]) for i in range(N)]
    omega_t = packets / T
    omega_w = log.woke.sum(axis=0) / T
    life = metrics.lifetime(cfg.energy, omega_t, omega_w)
    s = RunSummary(
        policy=cfg.policy, M=cfg.M, n_nodes=N, horizon=T, seed=cfg.seed,
        polls=polls.tolist(), deliveries=deliveries.tolist(), packets=packets.tolist(),
        total_polls=int(polls.sum()), total_packets=int(packets.sum()),
        total_deliveries=int(deliveries.sum()),
        mean_aoii=float(np.mean(log.aoii.sum(axis=1))),
        mean_reward=-math.fsum(per_step_cost) / T,
        rmse_per_node=rmse_nodes,
        rmse=float(np.sqrt(np.mean(err**2))),
        lifetime_steps=life,
        lifetime_years=metrics.steps_to_years(life, cfg.energy),
        fairness_overflows=overflows,
    )
    if truth.categories is not None:
        k = len(truth.category_names)
        s.category_names = list(truth.category_names)
        s.polls_per_category = np.bincount(truth.categories, weights=polls, minlength=k).astype(int).tolist()
        s.poll_share = metrics.polling_distribution(polls, truth.categories, k).tolist()
    return s


@dataclass
class RunResult:
    config: SimConfig
    log: StepLog
    summary: RunSummary
    truth: GroundTruth
    fairness_checks: list[tuple[float, float]] = field(default_factory=list)
    policy: object = None
    index_rows: list[tuple] | None = None

    def write_index_csv(self, path) -> None:
        if self.index_rows is None:
            raise ValueError("run was made without index_dump")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(INDEX_CSV_HEADER)
            w.writerows(self.index_rows)


def run(cfg: SimConfig, truth: GroundTruth | None = None, policy=None) -> RunResult:
    """Simulate one configuration; identical configs give identical logs."""
    cfg.validate()
    truth = truth if truth is not None else build_world(cfg)
    N, T = truth.n_nodes, min(truth.horizon, cfg.horizon)
    cfg.validate(N)
    est = cfg.estimation
    link = cfg.link

    policy = policy or make_policy(cfg.policy, cfg.whittle, **cfg.policy_params)
    policy.reset(N, cfg.M, node_rng(cfg.seed, POLICY_STREAM, 0))

    # one channel stream per node; draws are indexed by step so outcomes do not
    # depend on which other nodes were polled
    draws = np.stack([
        node_rng(cfg.seed, CHANNEL_STREAM, i).random((T, link.draws_per_poll)) for i in range(N)
    ])

    z0 = truth.values[:, 0]
    enc = NodeEncoderState.from_first_observation(z0, t=0, beta1=est.beta1, beta2=est.beta2, dt=est.dt)
    sink = SinkRecord(
        x1=enc.x1.copy(), x2=np.zeros(N), u=np.zeros(N, dtype=np.int64),
        rho_hat=np.ones(N), last_poll=np.zeros(N, dtype=np.int64), beta3=est.beta3,
    )
    pending = np.ones(N, dtype=bool)
    windows = [PdrWindow(est.pdr_window) for _ in range(N)]
    log = StepLog.empty(T, N)
    checks = []
    index_rows = [] if cfg.index_dump else None

    for t in range(T):
        z = truth.values[:, t]
        if t > 0:
            enc, vec = encode(enc, z, t)
        log.truth[t] = z
        log.estimate[t] = extrapolate(sink, t)[0]
        log.aoii[t] = metrics.aoii(sink, t)
        log.u[t] = sink.u
        log.x2[t] = sink.x2
        if t == 0:
            continue

        view = SinkView(t=t, records=sink, pending=pending, M=cfg.M)
        decision = [int(i) for i in policy.decide(view)]
        if len(set(decision)) != len(decision) or len(decision) > cfg.M or any(
            not 0 <= i < N for i in decision
        ):
            raise RuntimeError(f"policy {policy.name} returned an invalid decision {decision} at t={t}")
        idx = policy.step_index()
        if idx is not None:
            log.index[t] = idx
        log.penalty[t] = policy.step_penalty()
        if isinstance(policy, FairWhittleAoII) and policy.selection is not None:
            sel = policy.selection
            checks.append(fairness_loss_bound(policy.snapshot.W, sel.star, sel.fair_set, sel.replacements))
        snap = getattr(policy, "snapshot", None)
        if index_rows is not None and snap is not None:
            flags = snap.violating if snap.violating is not None else np.zeros(N, dtype=bool)
            index_rows.extend(
                (t, i, repr(float(snap.W[i])), repr(float(snap.c[i])), int(flags[i])) for i in range(N)
            )

        outcomes: dict[int, PollOutcome] = {}
        for i in decision:
            out = poll_from_uniforms(link, i, draws[i, t])
            outcomes[i] = out
            log.action[t, i] = True
            log.woke[t, i] = out.woke
            log.attempts[t, i] = out.attempts
            sink.last_poll[i] = t
            if out.success:
                log.success[t, i] = True
                sink.x1[i] = enc.x1[i]
                sink.x2[i] = enc.x2[i]
                sink.u[i] = t
                pending[i] = False
                log.rx_x1[t, i] = enc.x1[i]
                log.rx_x2[t, i] = enc.x2[i]
            ratio = windows[i].push(out.success)
            sink.rho_hat[i] = est.beta3 * ratio + (1.0 - est.beta3) * sink.rho_hat[i]

        policy.observe(SinkView(t=t, records=sink, pending=pending, M=cfg.M), decision, outcomes)

    summary = summarize(log, cfg, truth, getattr(policy, "overflows", 0))
    return RunResult(cfg, log, summary, truth, checks, policy, index_rows)


def _mean_summary(summaries: list[RunSummary]) -> dict:
    out = summaries[0].to_dict()
    for key, val in out.items():
        if key in ("policy", "M", "n_nodes", "horizon", "category_names"):
            continue
        vals = [getattr(s, key) for s in summaries]
        if key == "seed":
            out[key] = [s.seed for s in summaries]
        elif isinstance(val, list):
            out[key] = np.mean(np.array(vals, dtype=float), axis=0).tolist()
        else:
            out[key] = math.fsum(float(v) for v in vals) / len(vals)
    return out


def run_replications(cfg: SimConfig, seeds: list[int], workers: int = 1) -> dict:
    """Run ``cfg`` once per seed and average the summaries in seed order."""
    if not seeds:
        raise ValueError("at least one seed is required")
    cfgs = [_with_seed(cfg, s) for s in seeds]
    summaries = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_run_summary, c) for c in cfgs]
            for s, fut in zip(seeds, futures):
                try:
                    summaries.append(fut.result())
                except Exception as exc:
                    raise RuntimeError(f"replication with seed {s} failed: {exc}") from exc
    else:
        for c in cfgs:
            try:
                summaries.append(_run_summary(c))
            except Exception as exc:
                raise RuntimeError(f"replication with seed {c.seed} failed: {exc}") from exc
    return {"mean": _mean_summary(summaries), "per_seed": [s.to_dict() for s in summaries]}


def _with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    from dataclasses import replace

    return replace(cfg, seed=int(seed))


def _run_summary(cfg: SimConfig) -> RunSummary:
    return run(cfg).summary
