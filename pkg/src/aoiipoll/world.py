"""Ground-truth processes observed by the sensor nodes.

Two sources are supported: a synthetic sinusoid-plus-noise generator with
per-category parameters (optionally swapping the first two categories at a
reversal time), and replay of a logged sensor trace resampled onto a uniform
step grid.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MEAN = 20.0

# stream tags mixed into per-node seeds so world noise and channel draws never collide
WORLD_STREAM = 0
CHANNEL_STREAM = 1
POLICY_STREAM = 2

# Intel Berkeley lab layout: date time epoch moteid temperature humidity light voltage
INTEL_VALUE_COLUMNS = {"temperature": 4, "humidity": 5, "light": 6, "voltage": 7}
INTEL_NODE_COLUMN = 3
INTEL_TIME_COLUMN = 2


class ValidationError(ValueError):
    """A scenario, trace or config description is internally inconsistent."""


class TraceLoadError(RuntimeError):
    """No usable rows could be read from a trace file."""


@dataclass(frozen=True)
class CategorySpec:
    """One group of nodes sharing the same sinusoid parameters."""

    amplitude: float
    period: float
    noise_sigma: float
    node_count: int
    mean_value: float = DEFAULT_MEAN
    name: str = ""

    def validate(self) -> None:
        if not self.period > 0:
            raise ValidationError(f"category {self.name!r}: period must be > 0, got {self.period}")
        if self.noise_sigma < 0:
            raise ValidationError(f"category {self.name!r}: noise_sigma must be >= 0")
        if self.node_count < 1:
            raise ValidationError(f"category {self.name!r}: node_count must be >= 1")


@dataclass(frozen=True)
class ScenarioSpec:
    categories: tuple[CategorySpec, ...]
    horizon: int
    reversal_time: int | None = None
    name: str = "custom"

    @property
    def n_nodes(self) -> int:
        return sum(c.node_count for c in self.categories)

    def category_map(self) -> np.ndarray:
        """Category index of every node, nodes numbered category by category."""
        return np.repeat(np.arange(len(self.categories)), [c.node_count for c in self.categories])

    def category_names(self) -> list[str]:
        return [c.name or chr(ord("A") + k) for k, c in enumerate(self.categories)]

    def validate(self) -> None:
        if not self.categories:
            raise ValidationError("scenario has no categories")
        for c in self.categories:
            c.validate()
        if self.horizon < 1:
            raise ValidationError(f"horizon must be >= 1, got {self.horizon}")
        if self.reversal_time is not None:
            if len(self.categories) < 2:
                raise ValidationError("reversal needs at least two categories")
            if not 0 <= self.reversal_time < self.horizon:
                raise ValidationError(
                    f"reversal_time {self.reversal_time} must lie in [0, {self.horizon})"
                )


@dataclass(frozen=True)
class TraceSpec:
    """Binding of a delimited trace file to node/time/value columns.

    Columns are integer positions or header names. ``resample_interval`` is
    expressed in the units of the time column.
    """

    path: str
    value_kind: str = "temperature"
    node_column: int | str = INTEL_NODE_COLUMN
    time_column: int | str = INTEL_TIME_COLUMN
    value_column: int | str | None = None
    resample_interval: float = 1.0
    max_steps: int | None = None
    nodes: tuple[int, ...] | None = None

    @property
    def resolved_value_column(self) -> int | str:
        if self.value_column is not None:
            return self.value_column
        if self.value_kind not in INTEL_VALUE_COLUMNS:
            raise ValidationError(f"unknown value kind {self.value_kind!r}")
        return INTEL_VALUE_COLUMNS[self.value_kind]

    def validate(self) -> None:
        cols = [self.node_column, self.time_column, self.resolved_value_column]
        if len(set(cols)) != 3:
            raise ValidationError(f"trace column mapping must name three distinct columns, got {cols}")
        if not self.resample_interval > 0:
            raise ValidationError("resample_interval must be > 0")


@dataclass
class GroundTruth:
    """True measurement z_i(t) for every node i and step t, shape (N, T)."""

    values: np.ndarray
    categories: np.ndarray | None = None
    category_names: list[str] = field(default_factory=list)
    node_ids: list[int] | None = None
    gap_counts: dict[int, int] = field(default_factory=dict)
    skipped_rows: int = 0

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.values[:, t]


def node_rng(seed: int, stream: int, node: int) -> np.random.Generator:
    """Independent generator for one node, stable when other nodes are added."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, stream, node])


def category_parameters(spec: ScenarioSpec, horizon: int) -> tuple[np.ndarray, ...]:
    """Per-node, per-step (mean, amplitude, period, sigma) arrays with the reversal applied."""
    cmap = spec.category_map()
    cats = spec.categories
    shape = (spec.n_nodes, horizon)
    out = [np.empty(shape) for _ in range(4)]
    for k, c in enumerate(cats):
        rows = cmap == k
        for arr, val in zip(out, (c.mean_value, c.amplitude, c.period, c.noise_sigma)):
            arr[rows, :] = val
    if spec.reversal_time is not None:
        r = spec.reversal_time
        a, b = cmap == 0, cmap == 1
        # only the dynamics swap; the offset stays with the node
        for arr, attr in zip(out[1:], ("amplitude", "period", "noise_sigma")):
            arr[np.ix_(a, np.arange(r, horizon))] = getattr(cats[1], attr)
            arr[np.ix_(b, np.arange(r, horizon))] = getattr(cats[0], attr)
    return tuple(out)


def generate_synthetic(spec: ScenarioSpec, seed: int) -> GroundTruth:
    """z_i(t) = mean + A sin(2 pi t / P) + N(0, sigma) per node category.

    Noise for node i comes from its own stream keyed on (seed, i), so the
    output is a pure function of ``(spec, seed)``.
    """
    spec.validate()
    T = spec.horizon
    mean, amp, period, sigma = category_parameters(spec, T)
    t = np.arange(T, dtype=float)
    z = mean + amp * np.sin(2.0 * np.pi * t / period)
    for i in range(spec.n_nodes):
        z[i] += sigma[i] * node_rng(seed, WORLD_STREAM, i).standard_normal(T)
    return GroundTruth(
        values=z,
        categories=spec.category_map(),
        category_names=spec.category_names(),
        node_ids=list(range(spec.n_nodes)),
    )


# --- presets -----------------------------------------------------------------


def scenario_one(horizon: int = 10_000, mean_value: float = DEFAULT_MEAN) -> ScenarioSpec:
    """Ten nodes: five slowly oscillating (A) and five almost static (B)."""
    return ScenarioSpec(
        categories=(
            CategorySpec(5.0, 500.0, 0.1, 5, mean_value, "A"),
            CategorySpec(0.0, 500.0, 0.05, 5, mean_value, "B"),
        ),
        horizon=horizon,
        name="one",
    )


def scenario_two(horizon: int = 10_000, mean_value: float = DEFAULT_MEAN, amplitude: float = 5.0) -> ScenarioSpec:
    """Thirty nodes in three categories with periods 1500, 1000 and 500."""
    return ScenarioSpec(
        categories=(
            CategorySpec(amplitude, 1500.0, 0.05, 10, mean_value, "A"),
            CategorySpec(amplitude, 1000.0, 0.05, 10, mean_value, "B"),
            CategorySpec(amplitude, 500.0, 0.05, 10, mean_value, "C"),
        ),
        horizon=horizon,
        name="two",
    )


def scenario_three(horizon: int = 10_000, reversal_time: int = 5_000, mean_value: float = DEFAULT_MEAN) -> ScenarioSpec:
    """Scenario one with categories A and B exchanging behaviour at ``reversal_time``."""
    base = scenario_one(horizon, mean_value)
    return ScenarioSpec(base.categories, horizon, reversal_time, name="three")


SCENARIOS = {"one": scenario_one, "two": scenario_two, "three": scenario_three}


def scenario_by_name(name: str, horizon: int = 10_000) -> ScenarioSpec:
    try:
        return SCENARIOS[name](horizon=horizon)
    except KeyError:
        raise ValidationError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None


# --- trace replay --------------------------------------------------------------


def _sniff_rows(path: Path):
    with path.open("r", encoding="utf-8", errors="replace", newline="") as fh:
        head = fh.read(4096)
    comma = "," in head.splitlines()[0] if head.strip() else False
    with path.open("r", encoding="utf-8", errors="replace", newline="") as fh:
        if comma:
            yield from csv.reader(fh)
        else:
            for line in fh:
                yield line.split()


def _column_index(col: int | str, header: list[str] | None) -> int:
    if isinstance(col, int):
        return col
    if header is None or col not in header:
        raise ValidationError(f"column {col!r} not found in trace header {header}")
    return header.index(col)


def load_trace(spec: TraceSpec) -> GroundTruth:
    """Read a delimited trace and resample it onto a uniform step grid.

    Each grid cell keeps the last reading that falls in it; empty cells are
    forward-filled (cells before a node's first reading take that first
    reading). Malformed rows are skipped and counted. Nodes without any
    valid reading are dropped with a warning.
    """
    spec.validate()
    path = Path(spec.path)
    if not path.is_file():
        raise FileNotFoundError(f"trace file not found: {path}")

    rows = _sniff_rows(path)
    first = next(rows, None)
    if first is None:
        raise TraceLoadError(f"trace file is empty: {path}")
    header = None
    named = any(isinstance(c, str) for c in (spec.node_column, spec.time_column, spec.resolved_value_column))
    if named:
        header = [h.strip() for h in first]
        pending = []
    else:
        pending = [first]
    ni = _column_index(spec.node_column, header)
    ti = _column_index(spec.time_column, header)
    vi = _column_index(spec.resolved_value_column, header)

    samples: dict[int, list[tuple[float, float]]] = {}
    skipped = 0
    total = 0

    def take(row):
        nonlocal skipped, total
        total += 1
        try:
            node = int(float(row[ni]))
            ts = float(row[ti])
            val = float(row[vi])
        except (IndexError, ValueError):
            skipped += 1
            return
        if not (math.isfinite(ts) and math.isfinite(val)):
            skipped += 1
            return
        samples.setdefault(node, []).append((ts, val))

    for row in pending:
        take(row)
    for row in rows:
        if row:
            take(row)

    if not samples:
        raise TraceLoadError(f"all {total} rows of {path} were malformed")
    if skipped:
        log.warning("skipped %d malformed rows of %d in %s", skipped, total, path)

    wanted = list(spec.nodes) if spec.nodes is not None else sorted(samples)
    missing = [n for n in wanted if n not in samples]
    if missing:
        log.warning("nodes without samples excluded: %s", missing)
    nodes = [n for n in wanted if n in samples]
    if not nodes:
        raise TraceLoadError("none of the requested nodes have samples")

    t0 = min(min(ts for ts, _ in samples[n]) for n in nodes)
    t1 = max(max(ts for ts, _ in samples[n]) for n in nodes)
    T = int(math.floor((t1 - t0) / spec.resample_interval)) + 1
    if spec.max_steps is not None:
        T = min(T, spec.max_steps)

    values = np.empty((len(nodes), T))
    gaps: dict[int, int] = {}
    for row, n in enumerate(nodes):
        grid = np.full(T, np.nan)
        for ts, val in sorted(samples[n], key=lambda s: s[0]):
            k = int(math.floor((ts - t0) / spec.resample_interval))
            if k < T:
                grid[k] = val
        filled = ~np.isnan(grid)
        if not filled.any():
            # every reading lies past max_steps
            grid[:] = sorted(samples[n])[0][1]
            filled[0] = True
        first_k = int(np.argmax(filled))
        gaps[n] = int((~filled[first_k:]).sum())
        idx = np.where(filled, np.arange(T), 0)
        np.maximum.accumulate(idx, out=idx)
        grid = grid[idx]
        grid[:first_k] = grid[first_k]
        values[row] = grid

    return GroundTruth(values=values, node_ids=nodes, gap_counts=gaps, skipped_rows=skipped)
