"""Exit distributions, recurrence scans and localization exponents.

Every probability block at level n is a placement of the nine slot
integrals (quantum: Parseval integrals of |kernel|²; classical: kernel
values at z = 1). Exponents are least-squares slopes of -ln(sequence)
against n·ln 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import triple_orbit
from .green import reconstruct
from .kernel import CellKernel
from .quadrature import CircleGrid, LevelScan, scan_levels

LN2 = math.log(2)
BOUNDARY = ("0", "a", "b", "a'", "b'")
NA_FLOOR = 1e-14
P_INF_TOL = 1e-6


class EntropyDomainError(ValueError):
    """p^(n) vanishes on an entry where the limit distribution is positive."""


class FitError(ValueError):
    """Too few usable points for a slope."""


@dataclass
class ExitDistribution:
    """P^(n)(0, y) for y in {0, a, b, a', b'} as 4x4 (start, arrival) arrays."""

    level: int
    blocks: dict[str, np.ndarray]
    excluded_nodes: int = 0

    def totals(self) -> np.ndarray:
        """Total exit probability for each start label."""
        return sum(b.sum(axis=1) for b in self.blocks.values())

    def stacked(self) -> np.ndarray:
        return np.stack([self.blocks[y] for y in BOUNDARY])


def place(slot_values, level: int = 0) -> dict[str, np.ndarray]:
    """Arrange nine slot values into the five boundary blocks g(0, y)."""
    k = CellKernel(np.asarray(slot_values), level)
    return {y: np.real(reconstruct(k, "0", y)) for y in BOUNDARY}


def classical_slots(n: int) -> np.ndarray:
    """Slot probabilities of the uniform coin at z = 1 from the affine triple map.

    The generic cell solve agrees for small n but loses relative precision
    in u1, u2 once they fall far below u3.
    """
    t = triple_orbit(n, affine=True)[-1]
    u1, u2, u3 = float(t.u1), float(t.u2), float(t.u3)
    return np.array([u1, u2, u1, u2, u1, u2, u3, u3, u3])


def exit_distribution(n: int, grid: CircleGrid | None = None, coin: str = "quantum", scan: LevelScan | None = None) -> ExitDistribution:
    if n < 1:
        raise ValueError("level must be at least 1")
    if coin == "classical":
        return ExitDistribution(n, place(classical_slots(n), n))
    if scan is None or len(scan.integrals) < n:
        scan = scan_levels(n, grid or CircleGrid(), coin)
    return ExitDistribution(n, place(scan.integrals[n - 1], n), int(scan.excluded[n - 1]))


def recurrence_scan(n_max: int, grid: CircleGrid | None = None) -> LevelScan:
    """Integrals of |u_k|² for k = 1..6 and levels 1..n_max (see ``LevelScan.sextet``)."""
    if n_max > 40:
        raise ValueError("recurrence scan is capped at 40 levels")
    return scan_levels(n_max, grid or CircleGrid())


@dataclass
class ExponentFit:
    """Per-entry slopes of -ln(sequence) against n·ln 2."""

    slopes: np.ndarray
    intercepts: np.ndarray
    r2: np.ndarray
    residuals: np.ndarray
    na_mask: np.ndarray
    fit_range: tuple[int, int]
    points: np.ndarray = field(repr=False, default=None)


def fit_slopes(levels, sequences, fit_range: tuple[int, int], floor: float = NA_FLOOR) -> ExponentFit:
    """Fit every trailing entry of ``sequences`` (axis 0 indexes ``levels``).

    Entries whose values never exceed ``floor`` in the range are NA. Other
    entries use only points above the floor and need at least three.
    """
    levels = np.asarray(levels)
    seq = np.asarray(sequences, dtype=float)
    lo, hi = fit_range
    sel = (levels >= lo) & (levels <= hi)
    x_all = levels[sel] * LN2
    y_all = seq[sel].reshape(sel.sum(), -1)
    shape = seq.shape[1:]
    out = {k: np.full(y_all.shape[1], np.nan) for k in ("slope", "icpt", "r2", "res")}
    na = np.zeros(y_all.shape[1], dtype=bool)
    npts = np.zeros(y_all.shape[1], dtype=int)
    for e in range(y_all.shape[1]):
        ok = y_all[:, e] > floor
        if not ok.any():
            na[e] = True
            continue
        if ok.sum() < 3:
            raise FitError(f"entry {np.unravel_index(e, shape) if shape else ()} has {ok.sum()} usable points")
        x, y = x_all[ok], -np.log(y_all[ok, e])
        slope, icpt = np.polyfit(x, y, 1)
        fitted = slope * x + icpt
        ss = np.sum((y - y.mean()) ** 2)
        out["slope"][e], out["icpt"][e] = slope, icpt
        out["res"][e] = float(np.sqrt(np.mean((y - fitted) ** 2)))
        out["r2"][e] = 1 - np.sum((y - fitted) ** 2) / ss if ss > 0 else 1.0
        npts[e] = ok.sum()
    r = lambda a: a.reshape(shape)
    return ExponentFit(r(out["slope"]), r(out["icpt"]), r(out["r2"]), r(out["res"]), r(na), (lo, hi), r(npts))


def theory_limit() -> dict[str, np.ndarray]:
    """Limit blocks: 1/4 on every return entry, 0 at the outer corners."""
    return place(np.array([0, 0, 0, 0, 0, 0, 0.25, 0.25, 0.25]))


@dataclass
class ExponentReport:
    beta: ExponentFit
    gamma: ExponentFit
    p_inf: dict[str, np.ndarray]
    p_inf_converged: bool
    scan: LevelScan | None = field(repr=False, default=None)


def _default_inf_level(hi: int, coin: str) -> int:
    # classical levels are free, so the limit estimate can sit far beyond the fit
    return hi + 40 if coin == "classical" else hi + 5


def _limit(blocks_by_level: list[dict[str, np.ndarray]], p_inf: str):
    if p_inf == "theory":
        return theory_limit(), True
    if p_inf != "deepest":
        raise ValueError("p_inf must be 'theory' or 'deepest'")
    last, prev = blocks_by_level[-1], blocks_by_level[-2]
    gap = max(np.abs(last[y] - prev[y]).max() for y in BOUNDARY)
    return last, bool(gap < P_INF_TOL)


def _level_blocks(n_max: int, grid: CircleGrid | None, coin: str, scan: LevelScan | None):
    if coin == "classical":
        return [place(classical_slots(n), n) for n in range(1, n_max + 1)], None
    if scan is None or len(scan.integrals) < n_max:
        scan = scan_levels(n_max, grid or CircleGrid(), coin)
    return [place(scan.integrals[n - 1], n) for n in range(1, n_max + 1)], scan


def exponent_beta_gamma(
    n_range: tuple[int, int] = (8, 25),
    grid: CircleGrid | None = None,
    coin: str = "quantum",
    p_inf: str = "deepest",
    inf_level: int | None = None,
    scan: LevelScan | None = None,
) -> ExponentReport:
    """β_w(0,0) from |P(0,0) - P∞(0,0)| and γ_w(0,a_n) from P(0,a_n), both 4x4."""
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ValueError("bad fit range")
    top = max(hi, inf_level or _default_inf_level(hi, coin))
    blocks, scan = _level_blocks(top, grid, coin, scan)
    lim, conv = _limit(blocks, p_inf)
    levels = np.arange(1, top + 1)
    dev = np.stack([np.abs(b["0"] - lim["0"]) for b in blocks])
    hit = np.stack([b["a"] for b in blocks])
    beta = fit_slopes(levels, dev, (lo, hi))
    gamma = fit_slopes(levels, hit, (lo, hi))
    return ExponentReport(beta, gamma, lim, conv, scan)


@dataclass
class DeltaEta:
    delta: ExponentFit
    eta: ExponentFit
    eta_relative: ExponentFit
    d: np.ndarray
    H: np.ndarray
    kl: np.ndarray
    p_inf_converged: bool


def total_variation(p: dict[str, np.ndarray], q: dict[str, np.ndarray]) -> float:
    return 0.5 * sum(float(np.abs(p[y] - q[y]).sum()) for y in BOUNDARY)


def cross_entropy(p: dict[str, np.ndarray], p_inf: dict[str, np.ndarray]) -> float:
    """H = -Σ p∞ ln p with 0·ln 0 = 0."""
    h = 0.0
    for y in BOUNDARY:
        q, r = p_inf[y], p[y]
        pos = q > 0
        if np.any(r[pos] <= 0):
            idx = np.argwhere(pos & (r <= 0))[0]
            raise EntropyDomainError(f"p vanishes at block {y} entry {tuple(idx)} where the limit is positive")
        h -= float(np.sum(q[pos] * np.log(r[pos])))
    return h


def delta_eta(
    n_range: tuple[int, int] = (8, 25),
    grid: CircleGrid | None = None,
    coin: str = "quantum",
    p_inf: str = "deepest",
    inf_level: int | None = None,
    scan: LevelScan | None = None,
) -> DeltaEta:
    """Total-variation and entropy exponents of the rescaled exit distribution.

    ``eta`` fits the cross-entropy H^(n) = -Σ p∞ ln p^(n) as defined;
    ``eta_relative`` fits H^(n) - H^(∞) (the Kullback-Leibler divergence),
    reported alongside because H^(n) itself tends to a positive constant.
    """
    lo, hi = n_range
    top = max(hi, inf_level or _default_inf_level(hi, coin))
    blocks, _ = _level_blocks(top, grid, coin, scan)
    lim, conv = _limit(blocks, p_inf)
    levels = np.arange(1, top + 1)
    d = np.array([total_variation(b, lim) for b in blocks])
    H = np.array([cross_entropy(b, lim) for b in blocks])
    h_inf = cross_entropy(lim, lim)
    kl = H - h_inf
    return DeltaEta(
        fit_slopes(levels, d, n_range),
        fit_slopes(levels, H, n_range),
        fit_slopes(levels, np.abs(kl), n_range),
        d,
        H,
        kl,
        conv,
    )
