"""Scheduling policies. Each sees only the sink's view of the network."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import whittle
from .estimation import SinkRecord
from .metrics import aoii
from .whittle import WhittleConfig


@dataclass
class SinkView:
    """Everything a policy may look at when deciding step ``t``.

    ``pending`` marks nodes the sink has not yet heard from since start-up;
    their record is the deployment handshake and carries no rate estimate.
    """

    t: int
    records: SinkRecord
    pending: np.ndarray
    M: int

    @property
    def n_nodes(self) -> int:
        return len(self.pending)


def _top(scores, M: int, candidates=None) -> list[int]:
    scores = np.asarray(scores, dtype=float)
    ids = np.arange(len(scores)) if candidates is None else np.asarray(candidates)
    order = ids[np.lexsort((ids, -scores[ids]))]
    return [int(i) for i in order[:M]]


class Policy:
    name = "base"

    def reset(self, n_nodes: int, M: int, rng: np.random.Generator) -> None:
        self.n_nodes = n_nodes
        self.M = M
        self.rng = rng

    def decide(self, view: SinkView) -> list[int]:
        raise NotImplementedError

    def observe(self, view: SinkView, decision: list[int], outcomes: dict) -> None:
        """Called after the polls of step ``view.t`` resolved; ``view`` is post-update."""

    def step_index(self) -> np.ndarray | None:
        """Per-node priority used at the last decision, for logging."""
        return None

    def step_penalty(self) -> float:
        return math.nan


def rr_decide(t: int, N: int, M: int) -> list[int]:
    return [(t * M + k) % N for k in range(M)]


class RoundRobin(Policy):
    name = "rr"

    def decide(self, view):
        return rr_decide(view.t, view.n_nodes, view.M)


def aoi_decide(records, t: int, M: int) -> list[int]:
    return _top(np.broadcast_to(t - np.asarray(records.u), np.shape(records.u)), M)


class AoIGreedy(Policy):
    name = "aoi"

    def decide(self, view):
        return aoi_decide(view.records, view.t, view.M)


@dataclass
class KfState:
    """Constant-velocity Kalman covariance per node (value, rate)."""

    P: np.ndarray
    q: np.ndarray
    r: float = 0.25
    dt: float = 1.0

    @classmethod
    def initial(cls, n_nodes: int, q: float = 0.01, r: float = 0.25, dt: float = 1.0, p0: float | None = None):
        p0 = r if p0 is None else p0
        P = np.zeros((n_nodes, 2, 2))
        P[:, 0, 0] = P[:, 1, 1] = p0
        return cls(P=P, q=np.full(n_nodes, q, dtype=float), r=r, dt=dt)

    @property
    def F(self) -> np.ndarray:
        return np.array([[1.0, self.dt], [0.0, 1.0]])

    def process_noise(self) -> np.ndarray:
        dt = self.dt
        unit = np.array([[dt**3 / 3, dt**2 / 2], [dt**2 / 2, dt]])
        return self.q[:, None, None] * unit

    def predict(self) -> None:
        F = self.F
        self.P = F @ self.P @ F.T + self.process_noise()

    def traces(self) -> np.ndarray:
        return self.P[:, 0, 0] + self.P[:, 1, 1]

    def update(self, node: int, innovation: float | None = None, adapt: float = 0.0, q_min: float = 1e-6) -> np.ndarray:
        """Scalar measurement update on the value component (H = [1 0]).

        With ``adapt > 0`` the node's process-noise scale tracks the ratio of
        the squared innovation to its predicted variance.
        """
        P = self.P[node]
        S = P[0, 0] + self.r
        if innovation is not None and adapt > 0:
            ratio = innovation**2 / S
            self.q[node] = max(q_min, (1 - adapt) * self.q[node] + adapt * self.q[node] * ratio)
        K = P[:, 0] / S
        P = P - np.outer(K, P[0, :])
        self.P[node] = 0.5 * (P + P.T)
        return K


def kf_decide(traces, M: int, trace_threshold: float = 0.0) -> list[int]:
    traces = np.asarray(traces, dtype=float)
    eligible = np.flatnonzero(traces >= trace_threshold)
    return _top(traces, M, eligible)


class KalmanTrace(Policy):
    """Poll the nodes whose predicted covariance trace is largest.

    Only nodes whose trace reaches ``trace_threshold`` are polled, so quiet
    networks are polled less often than every step. The process-noise scale
    of each node adapts to its innovations.
    """

    name = "kf"

    def __init__(self, q: float = 0.01, r: float = 0.25, trace_threshold: float = 0.115,
                 adapt: float = 0.3, q_min: float = 1e-6, dt: float = 1.0):
        self.q0, self.r, self.trace_threshold = q, r, trace_threshold
        self.adapt, self.q_min, self.dt = adapt, q_min, dt

    def reset(self, n_nodes, M, rng):
        super().reset(n_nodes, M, rng)
        self.kf = KfState.initial(n_nodes, self.q0, self.r, self.dt)
        self.xhat = None
        self._traces = None

    def decide(self, view):
        if self.xhat is None:
            self.xhat = np.stack([np.asarray(view.records.x1, dtype=float), np.zeros(view.n_nodes)], axis=1)
        self.kf.predict()
        self.xhat = self.xhat @ self.kf.F.T
        self._traces = self.kf.traces()
        return kf_decide(self._traces, view.M, self.trace_threshold)

    def observe(self, view, decision, outcomes):
        for i in decision:
            if not outcomes[i].success:
                continue
            z = float(view.records.x1[i])
            nu = z - self.xhat[i, 0]
            K = self.kf.update(i, nu, self.adapt, self.q_min)
            self.xhat[i] = self.xhat[i] + K * nu

    def step_index(self):
        return self._traces


class WhittleAoII(Policy):
    """Index policy on the closed-form AoII threshold with online penalty."""

    name = "waoii"

    def __init__(self, cfg: WhittleConfig | None = None):
        self.cfg = cfg or WhittleConfig()

    def reset(self, n_nodes, M, rng):
        super().reset(n_nodes, M, rng)
        self.penalty = self.cfg.penalty
        self.snapshot = None
        self.selection = None
        self.overflows = 0

    def _select(self, W, M, view, candidates):
        return whittle.select_waoii(W[candidates], self.penalty, M)

    def decide(self, view):
        cfg = self.cfg
        t = view.t
        if cfg.reset_every and t % cfg.reset_every == 0:
            self.penalty = cfg.penalty
        c = whittle.threshold(view.records, t)
        W = whittle.index(view.records, t, cfg)
        self.snapshot = whittle.IndexSnapshot(W=W, c=c)
        if cfg.dynamic_penalty:
            self.penalty = whittle.dynamic_penalty_update(W, self.penalty, view.M)

        # nodes not yet heard from carry no rate estimate: serve them first
        pending = np.flatnonzero(view.pending)
        boot = [int(i) for i in pending[: view.M]]
        M_left = view.M - len(boot)
        self.selection = None
        if M_left == 0:
            return boot
        candidates = np.flatnonzero(~view.pending)
        local = self._select(W, M_left, view, candidates)
        return boot + [int(candidates[i]) for i in local]

    def step_index(self):
        return None if self.snapshot is None else self.snapshot.W

    def step_penalty(self):
        return self.penalty


class FairWhittleAoII(WhittleAoII):
    """WAoII plus a fairness window: nodes idle for ``eta`` steps are forced in."""

    name = "fwaoii"

    def _select(self, W, M, view, candidates):
        sel = whittle.select_fwaoii(
            W[candidates], self.penalty, M, self.cfg.eta,
            np.asarray(view.records.last_poll)[candidates], view.t,
        )
        g = lambda ids: [int(candidates[i]) for i in ids]
        self.selection = whittle.FairSelection(
            decision=g(sel.decision), star=g(sel.star), fair_set=g(sel.fair_set),
            replacements=[(int(candidates[a]), int(candidates[b])) for a, b in sel.replacements],
            violators=g(sel.violators), overflow=sel.overflow,
        )
        if sel.overflow:
            self.overflows += 1
        viol = np.zeros(len(W), dtype=bool)
        viol[self.selection.violators] = True
        self.snapshot.violating = viol
        return sel.decision


@dataclass
class WiqlState:
    Q: np.ndarray
    visits: np.ndarray
    rbar: np.ndarray
    steps: int = 0


class WIQL(Policy):
    """Simplified tabular Whittle-index Q-learning under average reward.

    Each node learns Q over (AoII bin, action); the index is Q(s, 1) - Q(s, 0)
    and the M largest indices are polled, with epsilon-greedy exploration.
    This is a compact stand-in, not a faithful port of any published learner.
    """

    name = "wiql"

    def __init__(self, penalty: float = 0.5, n_bins: int = 20, aoii_cap: float = 50.0,
                 alpha_power: float = 0.6, eps0: float = 0.99, eps_decay: float = 0.999,
                 eps_min: float = 0.01, gamma: float | None = None):
        self.penalty = penalty
        self.n_bins, self.aoii_cap = n_bins, aoii_cap
        self.alpha_power = alpha_power
        self.eps0, self.eps_decay, self.eps_min = eps0, eps_decay, eps_min
        self.gamma = gamma  # unused: average-reward updates only
        self.clamped = 0

    def reset(self, n_nodes, M, rng):
        super().reset(n_nodes, M, rng)
        self.state = WiqlState(
            Q=np.zeros((n_nodes, self.n_bins, 2)),
            visits=np.zeros((n_nodes, self.n_bins, 2), dtype=np.int64),
            rbar=np.zeros(n_nodes),
        )
        self._s = None
        self._aoii = None
        self._index = None

    def bins(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        width = self.aoii_cap / self.n_bins
        b = np.floor(values / width).astype(int)
        over = b >= self.n_bins
        self.clamped += int(over.sum())
        return np.clip(b, 0, self.n_bins - 1)

    def epsilon(self, t: int) -> float:
        return max(self.eps_min, self.eps0 * self.eps_decay**t)

    def alpha(self, visits) -> np.ndarray:
        return 1.0 / (1.0 + visits) ** self.alpha_power

    def decide(self, view):
        self._aoii = np.asarray(aoii(view.records, view.t), dtype=float)
        self._s = self.bins(self._aoii)
        Q = self.state.Q
        rows = np.arange(view.n_nodes)
        self._index = Q[rows, self._s, 1] - Q[rows, self._s, 0]
        if self.rng.random() < self.epsilon(self.state.steps):
            return sorted(int(i) for i in self.rng.choice(view.n_nodes, size=view.M, replace=False))
        return _top(self._index, view.M)

    def observe(self, view, decision, outcomes):
        st = self.state
        a = np.zeros(view.n_nodes, dtype=int)
        a[decision] = 1
        r = -(self._aoii + self.penalty * a)
        s_next = self.bins(aoii(view.records, view.t + 1))
        rows = np.arange(view.n_nodes)
        st.visits[rows, self._s, a] += 1
        lr = self.alpha(st.visits[rows, self._s, a])
        st.Q[rows, self._s, a] = wiql_update(
            st.Q[rows, self._s, a], r, st.rbar, st.Q[rows, s_next].max(axis=1), lr
        )
        st.steps += 1
        st.rbar += (r - st.rbar) / st.steps

    def step_index(self):
        return self._index


POLICIES = {
    "rr": RoundRobin,
    "aoi": AoIGreedy,
    "kf": KalmanTrace,
    "waoii": WhittleAoII,
    "fwaoii": FairWhittleAoII,
    "wiql": WIQL,
}


def wiql_update(q_sa: float, reward: float, rbar: float, q_next_max: float, lr: float) -> float:
    """One average-reward tabular update of Q(s, a)."""
    return q_sa + lr * (reward - rbar + q_next_max - q_sa)


def make_policy(name: str, whittle_cfg: WhittleConfig | None = None, **params) -> Policy:
    if name not in POLICIES:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}")
    whittle_cfg = whittle_cfg or WhittleConfig()
    if name in ("waoii", "fwaoii"):
        return POLICIES[name](whittle_cfg)
    if name == "wiql":
        params.setdefault("penalty", whittle_cfg.penalty)
    return POLICIES[name](**params)
