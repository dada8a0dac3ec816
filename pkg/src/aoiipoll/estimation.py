"""Node-side double-EWMA encoding and sink-side linear extrapolation.

The operations accept scalars or per-node numpy arrays; the engine keeps
one array entry per node and calls the same functions on whole columns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class StateVector:
    """(value, rate of change) pair stamped with its encode step ``u``."""

    x1: float
    x2: float
    u: int

    def as_row(self, node: int) -> tuple:
        return (node, self.u, repr(float(self.x1)), repr(float(self.x2)))


STATE_VECTOR_CSV_HEADER = ("node_id", "u", "x1", "x2")


@dataclass
class NodeEncoderState:
    x1: float | np.ndarray
    x2: float | np.ndarray
    beta1: float = 0.5
    beta2: float = 0.2
    dt: float = 1.0
    t: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise EstimationError(f"smoothing factors must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if not self.dt > 0:
            raise EstimationError("dt must be positive")

    @classmethod
    def from_first_observation(cls, z, t: int = 0, **kwargs) -> "NodeEncoderState":
        z = np.asarray(z, dtype=float)
        x1 = z.copy() if z.ndim else float(z)
        x2 = np.zeros_like(z) if z.ndim else 0.0
        return cls(x1=x1, x2=x2, t=t, **kwargs)


def encode(state: NodeEncoderState, z, t: int) -> tuple[NodeEncoderState, StateVector]:
    """Advance the encoder by one sample and return the vector it would transmit."""
    if not np.all(np.isfinite(z)):
        raise EstimationError(f"non-finite measurement at step {t}")
    b1, b2, dt = state.beta1, state.beta2, state.dt
    x1 = b1 * z + (1.0 - b1) * (state.x1 + state.x2 * dt)
    x2 = b2 * (x1 - state.x1) / dt + (1.0 - b2) * state.x2
    new = replace(state, x1=x1, x2=x2, t=t)
    return new, StateVector(x1, x2, t)


@dataclass
class SinkRecord:
    """What the sink believes about one node (or, with array fields, all nodes)."""

    x1: float | np.ndarray
    x2: float | np.ndarray
    u: int | np.ndarray = 0
    rho_hat: float | np.ndarray = 1.0
    last_poll: int | np.ndarray = 0
    beta3: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.beta3 <= 1.0:
            raise EstimationError("beta3 must lie in [0, 1]")

    @property
    def last_vector(self) -> StateVector:
        return StateVector(self.x1, self.x2, self.u)

    @classmethod
    def from_vector(cls, v: StateVector, **kwargs) -> "SinkRecord":
        return cls(x1=v.x1, x2=v.x2, u=v.u, **kwargs)


def extrapolate(record: SinkRecord, t) -> tuple:
    """Sink estimate (x1_hat, x2_hat) at step ``t`` from the last received vector."""
    if np.any(np.asarray(t) < np.asarray(record.u)):
        raise EstimationError(f"cannot extrapolate backwards: t={t} < u={record.u}")
    return record.x1 + (t - record.u) * record.x2, record.x2


def update_pdr(record: SinkRecord, window_ratio: float) -> SinkRecord:
    """EWMA of the windowed delivery ratio into ``rho_hat``."""
    if not 0.0 <= window_ratio <= 1.0:
        raise EstimationError(f"delivery ratio must lie in [0, 1], got {window_ratio}")
    rho = record.beta3 * window_ratio + (1.0 - record.beta3) * record.rho_hat
    return replace(record, rho_hat=min(1.0, max(0.0, rho)))


def apply_update(record: SinkRecord, v: StateVector, t: int) -> SinkRecord:
    """Install a successfully delivered vector received at step ``t``."""
    return replace(record, x1=v.x1, x2=v.x2, u=t)


@dataclass
class PdrWindow:
    """Trailing window of poll outcomes for one node."""

    size: int = 20
    outcomes: deque = field(default_factory=deque)

    def push(self, success: bool) -> float:
        self.outcomes.append(bool(success))
        if len(self.outcomes) > self.size:
            self.outcomes.popleft()
        return self.ratio

    @property
    def ratio(self) -> float:
        if not self.outcomes:
            return 1.0
        return sum(self.outcomes) / len(self.outcomes)
