"""Closed-form AoII Whittle index and the index-based selection rules.

For the distance-based AoII the active and passive Q-values differ only in
the next-step AoII, which gives the threshold

    c = (t + 1 - u) * |x2(u)|

as the penalty at which polling and idling are equally good. Selection
activates the M largest indices that reach the current penalty; the
penalty itself is raised online whenever more than M arms exceed it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class WhittleConfig:
    penalty: float = 0.5
    eta: float = math.inf
    use_pdr_weighting: bool = True
    dynamic_penalty: bool = True
    # plumbing only: restore the initial penalty every k steps (None keeps it monotone)
    reset_every: int | None = None

    def __post_init__(self):
        if self.penalty < 0:
            raise ValueError("penalty must be >= 0")
        if not self.eta >= 1:
            raise ValueError("fairness window must be >= 1 (or inf)")


@dataclass
class IndexSnapshot:
    """Per-node index W, raw threshold c, and fairness-violation flag at one step."""

    W: np.ndarray
    c: np.ndarray
    violating: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.violating is None:
            self.violating = np.zeros(len(self.W), dtype=bool)


def threshold(record, t):
    """Penalty at which polling becomes optimal, assuming a perfect link."""
    return (t + 1 - record.u) * np.abs(record.x2)


def index(record, t, cfg: WhittleConfig):
    c = threshold(record, t)
    if cfg.use_pdr_weighting:
        return record.rho_hat * c
    return c


def ranking(W) -> np.ndarray:
    """Node ids ordered by decreasing index, lowest id first among ties."""
    W = np.asarray(W, dtype=float)
    return np.lexsort((np.arange(len(W)), -W))


def dynamic_penalty_update(thresholds, penalty: float, M: int) -> float:
    """Raise the penalty to the M-th largest threshold when more than M exceed it."""
    if M < 1:
        raise ValueError("M must be >= 1")
    c = np.asarray(thresholds, dtype=float)
    exceed = np.flatnonzero(c > penalty)
    if len(exceed) <= M:
        return penalty
    order = exceed[np.lexsort((exceed, -c[exceed]))]
    return float(c[order[M - 1]])


def select_waoii(W, penalty: float, M: int) -> list[int]:
    """Top-M nodes among those whose index reaches the penalty."""
    W = np.asarray(W, dtype=float)
    chosen = []
    for i in ranking(W):
        if len(chosen) == M or W[i] < penalty:
            break
        chosen.append(int(i))
    return chosen


@dataclass
class FairSelection:
    """Outcome of a fairness-constrained selection.

    ``star`` is the unconstrained top-M set and ``fair_set`` the same set after
    fairness replacements, both before the penalty filter; ``decision`` is what
    is actually polled.
    """

    decision: list[int]
    star: list[int]
    fair_set: list[int]
    replacements: list[tuple[int, int]]
    violators: list[int]
    overflow: bool = False


def select_fwaoii(W, penalty: float, M: int, eta: float, last_poll, t: int) -> FairSelection:
    """WAoII selection with nodes unpolled for ``eta`` steps forced in.

    Violators replace the lowest-index members of the top-M set, highest-index
    violators first. Slots holding a violator are exempt from the penalty
    filter; the remaining slots keep the usual ``W >= penalty`` test.
    """
    W = np.asarray(W, dtype=float)
    last_poll = np.asarray(last_poll)
    rank = ranking(W)
    star = [int(i) for i in rank[:M]]
    violators = [int(i) for i in rank if t - last_poll[i] >= eta]

    overflow = len(violators) > M
    served = violators[:M]
    in_star = set(star)
    inserts = [f for f in served if f not in in_star]
    removable = [s for s in reversed(star) if s not in set(served)]
    removed = removable[: len(inserts)]
    replacements = list(zip(removed, inserts))

    gone = set(removed)
    fair_set = [s for s in star if s not in gone] + inserts
    forced = set(served)
    pos = {int(i): k for k, i in enumerate(rank)}
    decision = sorted(
        (i for i in fair_set if i in forced or W[i] >= penalty),
        key=pos.__getitem__,
    )
    return FairSelection(decision, star, fair_set, replacements, violators, overflow)


def fairness_loss_bound(W, star, fair_set, replacements) -> tuple[float, float]:
    """Index-sum loss of the fair set against the top-M set, and its replacement bound."""
    W = np.asarray(W, dtype=float)
    # each side is one exactly rounded sum of signed terms, so shared members
    # cancel exactly instead of leaving an ulp of difference between two sums
    actual = math.fsum([*W[list(star)], *(-W[list(fair_set)])])
    bound = math.fsum(x for j, f in replacements for x in (W[j], -W[f]))
    return actual, bound
