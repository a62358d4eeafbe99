"""Series of -ln(observable) against n for external plotting."""

from __future__ import annotations

import math

import numpy as np

from .classical import phi_orbit
from .green import level0_out
from .observables import (
    NA_FLOOR,
    _default_inf_level,
    _level_blocks,
    _limit,
    cross_entropy,
    total_variation,
)
from .quadrature import CircleGrid

FAMILIES = ("delta", "eta", "eta_relative", "beta", "gamma", "phi1")
LN2 = math.log(2)


def _series(levels, values):
    """(n, -ln v, fitted) triples; the fit needs three points above the floor."""
    levels = np.asarray(levels)
    values = np.asarray(values, dtype=float)
    ok = values > NA_FLOOR
    y = np.full(len(values), np.nan)
    y[ok] = -np.log(values[ok])
    fitted = [None] * len(values)
    if ok.sum() >= 3:
        slope, icpt = np.polyfit(levels[ok] * LN2, y[ok], 1)
        fitted = [float(slope * n * LN2 + icpt) if o else None for n, o in zip(levels, ok)]
    return [(int(n), float(v), f) for n, v, f, o in zip(levels, y, fitted, ok) if o]


def exponent_series(
    levels, grid: CircleGrid | None = None, coin: str = "quantum", family: str = "all", p_inf: str = "deepest"
) -> dict[str, list]:
    """Map series name to [(n, -ln value, fitted line or None)] over ``levels``."""
    fams = FAMILIES if family == "all" else (family,)
    levels = list(levels)
    out: dict[str, list] = {}
    if "phi1" in fams:
        orbit = phi_orbit(max(levels))
        out["phi1"] = _series(levels, [orbit[n].phi1 for n in levels])
    if not set(fams) - {"phi1"}:
        return out
    top = max(max(levels), _default_inf_level(max(levels), coin))
    blocks, _ = _level_blocks(top, grid, coin, None)
    lim, _ = _limit(blocks, p_inf)
    sel = [blocks[n - 1] for n in levels]
    if "delta" in fams:
        out["delta"] = _series(levels, [total_variation(b, lim) for b in sel])
    if "eta" in fams or "eta_relative" in fams:
        H = np.array([cross_entropy(b, lim) for b in sel])
        if "eta" in fams:
            out["eta"] = _series(levels, H)
        if "eta_relative" in fams:
            out["eta_relative"] = _series(levels, np.abs(H - cross_entropy(lim, lim)))
    lab0 = level0_out("0")
    for name, y, cols in (("beta", "0", lab0), ("gamma", "a", level0_out("a"))):
        if name not in fams:
            continue
        for a, i in enumerate(lab0):
            for b, j in enumerate(cols):
                ref = lim[y][a, b] if name == "beta" else 0.0
                out[f"{name}[{i},{j}]"] = _series(levels, [abs(bl[y][a, b] - ref) for bl in sel])
    return out

