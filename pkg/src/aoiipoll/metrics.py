"""Freshness, accuracy, cost and energy metrics over sink records and run logs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SECONDS_PER_YEAR = 365.25 * 24 * 3600


class MetricsError(ValueError):
    pass


def aoi(record, t):
    """Steps since the last successful update."""
    return t - record.u


def aoii(record, t):
    """Distance-based AoII estimated at the sink: (t - u) * |x2(u)|."""
    return (t - record.u) * np.abs(record.x2)


def aoii_next(record, t, polled, success):
    """AoII one step ahead given this step's action and transmission outcome."""
    polled = np.asarray(polled, dtype=bool)
    success = np.asarray(success, dtype=bool)
    if np.any(success & ~polled):
        raise MetricsError("a transmission cannot succeed for a node that was not polled")
    out = np.where(polled & success, 0.0, (t + 1 - record.u) * np.abs(record.x2))
    return out if out.ndim else float(out)


def step_cost(aoii_values, actions, penalty: float) -> float:
    a = np.asarray(aoii_values, dtype=float)
    x = np.asarray(actions, dtype=float)
    if a.shape != x.shape:
        raise MetricsError("aoii and action vectors differ in length")
    return math.fsum(a) + penalty * math.fsum(x)


def step_reward(aoii_values, actions, penalty: float) -> float:
    return -step_cost(aoii_values, actions, penalty)


def rmse(truth, estimate) -> float:
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.size == 0:
        raise MetricsError("rmse of an empty series")
    if truth.shape != estimate.shape:
        raise MetricsError("truth and estimate differ in shape")
    return float(np.sqrt(np.mean((truth - estimate) ** 2)))


@dataclass(frozen=True)
class EnergyModel:
    """Per-event energies in mJ and battery capacity (162 kJ by default)."""

    e_tx: float = 50.0
    e_sense: float = 10.0
    e_wake: float = 10.0
    e_sleep: float = 1.0
    e_max: float = 162e6
    step_seconds: float = 30.0

    def __post_init__(self):
        if min(self.e_tx, self.e_sense, self.e_wake, self.e_sleep) < 0:
            raise ValueError("energies must be nonnegative")
        if not self.e_max > 0:
            raise ValueError("e_max must be positive")

    def per_step(self, omega_t, omega_w):
        return omega_t * self.e_tx + omega_w * (self.e_sense + self.e_wake) + (1.0 - omega_w) * self.e_sleep


def node_lifetime(model: EnergyModel, omega_t, omega_w):
    """Battery lifetime in steps for given transmission and wake-up frequencies."""
    denom = np.asarray(model.per_step(omega_t, omega_w), dtype=float)
    if np.any(denom <= 0):
        raise MetricsError("energy drain per step is zero; lifetime is unbounded")
    return model.e_max / denom


def lifetime(model: EnergyModel, omega_t, omega_w) -> float:
    """Average node lifetime in steps, from per-node frequency arrays."""
    per_node = np.atleast_1d(node_lifetime(model, omega_t, omega_w))
    return float(np.mean(per_node))


def steps_to_years(steps: float, model: EnergyModel) -> float:
    return steps * model.step_seconds / SECONDS_PER_YEAR


def polling_distribution(poll_counts, category_map, n_categories: int | None = None) -> np.ndarray:
    """Percentage of all polls landing in each category.

    ``poll_counts`` is per node; ``category_map`` maps node index to category
    index and must cover every node.
    """
    counts = np.asarray(poll_counts, dtype=float)
    cmap = np.asarray(category_map)
    if cmap.shape != counts.shape or np.any(cmap < 0):
        raise MetricsError("every node needs a category")
    k = int(n_categories if n_categories is not None else cmap.max() + 1)
    per_cat = np.bincount(cmap, weights=counts, minlength=k)
    total = per_cat.sum()
    if total == 0:
        return np.zeros(k)
    return 100.0 * per_cat / total
