"""Unit-circle sampling of Green functions and Parseval integration.

Generating functions are evaluated at z = e^{iθ}. For f(z) = Σ c_t z^t the
mean of |f|² over the circle is Σ |c_t|², i.e. a total probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dual
from .coin import get_coin
from .green import COND_LIMIT, GreenSextet, initial_sextet, invert_shifted, assemble_blocks, iterate, kernel_blocks, renormalize
from .kernel import CellKernel

MAX_EXCLUDED = 0.01
MAX_FILLED = 0.001


class QuadratureError(RuntimeError):
    """Too many quadrature nodes sit on (numerical) singularities."""


@dataclass(frozen=True)
class CircleGrid:
    """Nodes on |z| = radius.

    Trapezoid nodes sit at angles 2π(k + offset)/N. The default half-step
    offset keeps every node off z = ±1 and e^{±2πi/3}, where the cell
    systems have removable singularities.
    """

    node_count: int = 4096
    scheme: str = "trapezoid"
    samples: int = 1_000_000
    seed: int = 0
    radius: float = 1.0
    offset: float = 0.5

    def __post_init__(self):
        if self.scheme not in ("trapezoid", "mc"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.node_count < 1 or self.samples < 1:
            raise ValueError("grid needs at least one node")

    @property
    def theta(self) -> np.ndarray:
        if self.scheme == "trapezoid":
            return 2 * np.pi * (np.arange(self.node_count) + self.offset) / self.node_count
        rng = np.random.default_rng(self.seed)
        return np.sort(rng.uniform(0.0, 2 * np.pi, self.samples))

    @property
    def z(self) -> np.ndarray:
        return self.radius * np.exp(1j * self.theta)

    def __len__(self) -> int:
        return self.node_count if self.scheme == "trapezoid" else self.samples


@dataclass
class LevelSamples:
    """Level-n reduced kernel at every node, plus the exclusion record."""

    level: int
    grid: CircleGrid
    kernel: CellKernel
    excluded: np.ndarray
    max_cond: np.ndarray = field(repr=False)

    @property
    def sextet(self) -> GreenSextet:
        return GreenSextet.from_kernel(self.kernel)

    @property
    def triple(self):
        """(u1, u2, u3) of the uniform-coin walk: out_near, out_far, return."""
        c = self.kernel.coef
        return c[..., [0, 1, 6]]

    @property
    def excluded_count(self) -> int:
        return int(np.count_nonzero(self.excluded))


def _bad_nodes(values) -> np.ndarray:
    v = dual.value(values)
    ok = np.isfinite(v).all(axis=-1)
    if isinstance(values, dual.Dual):
        ok &= np.isfinite(values.der).all(axis=-1)
    return ~ok


def _step_levels(z, n: int, coin: str):
    """Yield (kernel, bad-node mask, worst condition) for levels 1..n."""
    bad = np.zeros(np.shape(dual.value(z)), dtype=bool)
    worst = np.ones(bad.shape)
    if coin == "quantum":
        u = initial_sextet(z)
        for _ in range(n):
            inv = invert_shifted(assemble_blocks(u), check=False)
            worst = np.maximum(worst, np.where(np.isfinite(inv.cond), inv.cond, np.inf))
            u = iterate(u, inverse=inv)
            bad |= _bad_nodes(u.values)
            yield u.kernel(), bad | ~(worst <= COND_LIMIT), worst
    else:
        k = CellKernel.initial(z, get_coin(coin))
        for _ in range(n):
            inv = invert_shifted(kernel_blocks(k), check=False)
            worst = np.maximum(worst, np.where(np.isfinite(inv.cond), inv.cond, np.inf))
            k = renormalize(k, check=False)
            bad |= _bad_nodes(k.coef)
            yield k, bad | ~(worst <= COND_LIMIT), worst


def _check_excluded(excluded: np.ndarray, n: int, total: int):
    if excluded.sum() > MAX_EXCLUDED * total:
        raise QuadratureError(
            f"{excluded.sum()} of {total} nodes excluded at level {n}; refine or shift the grid"
        )


def sextet_on_circle(n: int, grid: CircleGrid, coin: str = "quantum", jet: bool = False) -> LevelSamples:
    """Iterate the recursion n times from the one-step kernel at every node.

    The quantum coin runs through the sextet iteration map; the classical coin
    runs the same cell solve on the nine-slot kernel. Nodes where a factored
    4x4 matrix has condition estimate above 1e12 are excluded.
    """
    if n < 0:
        raise ValueError("level must be nonnegative")
    z = grid.z
    if jet:
        z = dual.seed(z)
    k = CellKernel.initial(z, get_coin(coin))
    excluded = np.zeros(len(grid), dtype=bool)
    worst = np.ones(len(grid))
    for k, excluded, worst in _step_levels(z, n, coin):
        pass
    _check_excluded(excluded, n, len(grid))
    return LevelSamples(n, grid, k, excluded, worst)


@dataclass
class LevelScan:
    """Circle means of |kernel coefficient|² for levels 1..n_max.

    ``integrals[n-1]`` holds the nine slot integrals of level n, so exit
    probability matrices follow by placing them with the kernel patterns.
    """

    grid: CircleGrid
    coin: str
    integrals: np.ndarray
    excluded: np.ndarray

    @property
    def levels(self) -> np.ndarray:
        return np.arange(1, len(self.integrals) + 1)

    @property
    def sextet(self) -> np.ndarray:
        """Integrals of |u1|²..|u6|² per level."""
        return self.integrals[:, list(SEXTET_SLOTS)]


SEXTET_SLOTS = (0, 1, 3, 2, 6, 8)
CHUNK = 1 << 15


def _chunk_sum(values: np.ndarray, excluded: np.ndarray, fill: bool) -> np.ndarray:
    if not excluded.any():
        return values.sum(axis=0)
    kept = np.flatnonzero(~excluded)
    if not fill or len(kept) == 0:
        return values[kept].sum(axis=0)
    filled = values.copy()
    for m in np.flatnonzero(excluded):
        pos = np.searchsorted(kept, m)
        lo = kept[max(pos - 1, 0)]
        hi = kept[min(pos, len(kept) - 1)]
        filled[m] = 0.5 * (values[lo] + values[hi])
    return filled.sum(axis=0)


def scan_levels(n_max: int, grid: CircleGrid, coin: str = "quantum", chunk: int = CHUNK) -> LevelScan:
    """Parseval integrals of every kernel slot for levels 1..n_max in one pass.

    Nodes are processed in contiguous chunks to bound memory. Excluded
    trapezoid nodes are filled from neighbours inside their chunk; excluded
    Monte Carlo samples are dropped.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    theta = grid.theta
    total = len(theta)
    sums = np.zeros((n_max, 9))
    counts = np.zeros(n_max)
    excluded = np.zeros(n_max, dtype=int)
    trap = grid.scheme == "trapezoid"
    for start in range(0, total, chunk):
        z = grid.radius * np.exp(1j * theta[start : start + chunk])
        for lvl, (k, bad, _) in enumerate(_step_levels(z, n_max, coin)):
            sq = np.abs(np.nan_to_num(k.coef, nan=0.0)) ** 2
            sums[lvl] += _chunk_sum(sq, bad, trap)
            counts[lvl] += len(z) if trap else np.count_nonzero(~bad)
            excluded[lvl] += int(bad.sum())
    for lvl in range(n_max):
        _check_excluded(np.ones(excluded[lvl], dtype=bool), lvl + 1, total)
        if trap and excluded[lvl] > MAX_FILLED * total:
            raise QuadratureError(f"{excluded[lvl]} excluded nodes exceed the fill budget at level {lvl + 1}")
    return LevelScan(grid, coin, sums / counts[:, None], excluded)


def circle_mean(values, grid: CircleGrid, excluded: np.ndarray | None = None):
    """(1/2π)∫ f dθ over the grid, axis 0 indexing nodes.

    Excluded trapezoid nodes take the average of their nearest kept
    neighbours (allowed for at most 0.1% of nodes); excluded Monte Carlo
    samples are dropped.
    """
    values = np.asarray(values)
    if excluded is None or not excluded.any():
        return values.mean(axis=0)
    if grid.scheme == "mc":
        return values[~excluded].mean(axis=0)
    if excluded.mean() > MAX_FILLED:
        raise QuadratureError(f"{excluded.sum()} excluded nodes exceed the fill budget")
    kept = np.flatnonzero(~excluded)
    filled = values.copy()
    N = len(values)
    for m in np.flatnonzero(excluded):
        pos = np.searchsorted(kept, m)
        lo = kept[pos - 1] if pos > 0 else kept[-1]
        hi = kept[pos] if pos < len(kept) else kept[0]
        filled[m] = 0.5 * (values[lo] + values[hi])
    return filled.sum(axis=0) / N


def parseval_integral(samples, grid: CircleGrid, excluded: np.ndarray | None = None):
    """(1/2π)∫ |f(e^{iθ})|² dθ, elementwise over trailing axes."""
    return circle_mean(np.abs(dual.value(samples)) ** 2, grid, excluded)


def radial_derivative(q) -> np.ndarray:
    """z ∂_z of a quantity computed from a radially seeded jet."""
    if not isinstance(q, dual.Dual):
        return np.zeros_like(np.asarray(q, dtype=complex))
    return q.der


def radial_difference(f: Callable[[np.ndarray], np.ndarray], theta, h: float = 1e-6):
    """Central difference of f(e^{s+iθ}) in s at s=0."""
    theta = np.asarray(theta, dtype=float)
    return (f(np.exp(h + 1j * theta)) - f(np.exp(-h + 1j * theta))) / (2 * h)


def taylor_coefficients(f: Callable[[np.ndarray], np.ndarray], t_max: int, radius: float = 0.5, nodes: int = 64):
    """Coefficients c_0..c_tmax of f about 0 from trigonometric moments on |z| = radius.

    ``f`` maps an array of nodes to an array whose axis 0 indexes the nodes.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.asarray(f(radius * np.exp(1j * theta)))
    t = np.arange(t_max + 1)
    basis = np.exp(-1j * np.outer(t, theta)) / nodes  # (T, N)
    coef = np.tensordot(basis, vals, axes=(1, 0))
    scale = radius ** (-t.astype(float))
    return coef * scale.reshape((-1,) + (1,) * (coef.ndim - 1))
