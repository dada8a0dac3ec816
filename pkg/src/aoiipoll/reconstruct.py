"""Offline reconstruction of a node's series from the vectors the sink received."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .metrics import rmse


class ReconstructionError(ValueError):
    pass


def hermite_reconstruction(anchor_t, anchor_x1, anchor_x2, t) -> np.ndarray:
    """Cubic Hermite through (u, x1) with slopes x2, linear extrapolation outside.

    Before the first anchor the first anchor's line is used backwards; with a
    single anchor the result is exactly the sink's linear extrapolation.
    """
    u = np.asarray(anchor_t, dtype=float)
    x1 = np.asarray(anchor_x1, dtype=float)
    x2 = np.asarray(anchor_x2, dtype=float)
    t = np.asarray(t, dtype=float)
    if u.size == 0:
        raise ReconstructionError("no anchors to reconstruct from")
    out = np.empty_like(t)
    lo = t <= u[0]
    hi = t >= u[-1]
    out[lo] = x1[0] + (t[lo] - u[0]) * x2[0]
    out[hi] = x1[-1] + (t[hi] - u[-1]) * x2[-1]
    mid = ~(lo | hi)
    if mid.any():
        out[mid] = CubicHermiteSpline(u, x1, x2)(t[mid])
    return out


def read_node(steps_csv: str | Path, node: int) -> dict:
    cols = {k: [] for k in ("t", "truth", "estimate_x1", "rx_x1", "rx_x2", "u", "x2")}
    found = False
    with open(steps_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if int(row["node"]) != node:
                continue
            found = True
            cols["t"].append(int(row["t"]))
            cols["truth"].append(float(row["truth"]))
            cols["estimate_x1"].append(float(row["estimate_x1"]))
            cols["rx_x1"].append(float(row["rx_x1"]) if row["rx_x1"] else np.nan)
            cols["rx_x2"].append(float(row["rx_x2"]) if row["rx_x2"] else np.nan)
            cols["u"].append(int(row["u"]))
            cols["x2"].append(float(row["x2"]))
    if not found:
        raise ReconstructionError(f"node {node} does not appear in {steps_csv}")
    return {k: np.asarray(v) for k, v in cols.items()}


def reconstruct_series(t, truth, estimate, rx_x1, rx_x2) -> dict:
    """Build online and offline estimates for one node from its log columns.

    The handshake state at step 0 (the estimate there, zero slope) serves as
    the first anchor; every delivered vector adds another.
    """
    t = np.asarray(t)
    got = ~np.isnan(rx_x1)
    anchor_t = np.concatenate([[t[0]], t[got]])
    anchor_x1 = np.concatenate([[estimate[0]], rx_x1[got]])
    anchor_x2 = np.concatenate([[0.0], rx_x2[got]])
    if got.any() and t[got][0] == t[0]:
        anchor_t, anchor_x1, anchor_x2 = anchor_t[1:], anchor_x1[1:], anchor_x2[1:]
    offline = hermite_reconstruction(anchor_t, anchor_x1, anchor_x2, t)
    return {
        "t": t,
        "truth": np.asarray(truth),
        "online_estimate": np.asarray(estimate),
        "offline_spline": offline,
        "online_rmse": rmse(truth, estimate),
        "offline_rmse": rmse(truth, offline),
        "anchors": int(anchor_t.size),
    }


def reconstruct_file(steps_csv: str | Path, node: int, out_csv: str | Path | None = None) -> dict:
    cols = read_node(steps_csv, node)
    rec = reconstruct_series(cols["t"], cols["truth"], cols["estimate_x1"], cols["rx_x1"], cols["rx_x2"])
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t", "truth", "online_estimate", "offline_spline"))
            for row in zip(rec["t"], rec["truth"], rec["online_estimate"], rec["offline_spline"]):
                w.writerow((int(row[0]), *(repr(float(v)) for v in row[1:])))
    return rec
