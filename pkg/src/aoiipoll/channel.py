"""Wake-up radio polling transaction over a Bernoulli link."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkModel:
    """Per-attempt delivery probability per node, retry limit, wake-up reliability."""

    pdr: tuple[float, ...] | float = 0.9
    r_max: int = 3
    wakeup_reliability: float = 1.0

    def __post_init__(self):
        for p in np.atleast_1d(self.pdr):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"pdr must lie in [0, 1], got {p}")
        if self.r_max < 0:
            raise ValueError("r_max must be >= 0")
        if not 0.0 <= self.wakeup_reliability <= 1.0:
            raise ValueError("wakeup_reliability must lie in [0, 1]")

    def pdr_of(self, node: int) -> float:
        if np.ndim(self.pdr) == 0:
            return float(self.pdr)
        return float(self.pdr[node])

    @property
    def draws_per_poll(self) -> int:
        return self.r_max + 2


@dataclass(frozen=True)
class PollOutcome:
    woke: bool
    attempts: int
    success: bool


def success_probability(pdr: float, r_max: int, wakeup_reliability: float = 1.0) -> float:
    """Probability that a poll delivers: wake-up and at least one of r_max + 1 attempts."""
    return wakeup_reliability * (1.0 - (1.0 - pdr) ** (r_max + 1))


def poll_from_uniforms(link: LinkModel, node: int, draws) -> PollOutcome:
    """Resolve one poll from ``r_max + 2`` uniforms: the first decides wake-up."""
    if not draws[0] < link.wakeup_reliability:
        return PollOutcome(False, 0, False)
    rho = link.pdr_of(node)
    for k in range(link.r_max + 1):
        if draws[1 + k] < rho:
            return PollOutcome(True, k + 1, True)
    return PollOutcome(True, link.r_max + 1, False)


def poll(link: LinkModel, node: int, rng: np.random.Generator) -> PollOutcome:
    return poll_from_uniforms(link, node, rng.random(link.draws_per_poll))
