"""First passage to the outer corners of the doubled cell.

The level-(n+1) passage amplitudes come from the level-n kernel acting on
the doubled cell F(1) ∪ F(1)'. The four outer corners absorb, the origin
does not: with interior states I (the 28 directed states of the seven
non-corner vertices) and corner states B,

    G = (I - R_II)^-1 R_IB,

and the rows of G belonging to the origin are g1(0, corner).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dual
from .green import COND_LIMIT, SingularityError, reconstruct
from .kernel import CellKernel, apply, pattern
from .lattice import build_level
from .quadrature import CircleGrid, circle_mean, sextet_on_circle

CORNERS = ("a", "b", "a'", "b'")
BOUNDARY = ("0", "a", "b", "a'", "b'")
PASSAGE_LEVEL_CAP = 3


@dataclass(frozen=True)
class _Geometry:
    interior: tuple
    boundary: tuple
    P_ii: np.ndarray
    P_ib: np.ndarray
    origin_rows: np.ndarray
    corner_cols: dict


@lru_cache(maxsize=1)
def _geometry() -> _Geometry:
    g = build_level(1)
    corner_sites = {name: g.corner_sites[name] for name in CORNERS}
    is_corner = set(corner_sites.values())
    states = g.states()
    interior = tuple(s for s in states if s.site not in is_corner)
    boundary = tuple(s for s in states if s.site in is_corner)
    rows = np.array([k for k, s in enumerate(interior) if s.site == (0, 0)])
    cols = {name: np.array([k for k, s in enumerate(boundary) if s.site == site]) for name, site in corner_sites.items()}
    return _Geometry(interior, boundary, pattern(g, interior, interior), pattern(g, interior, boundary), rows, cols)


def passage_system(k: CellKernel):
    """System matrix I - R_II and right-hand side R_IB (28x28 and 28x16)."""
    geo = _geometry()
    R_ii = apply(k.coef, geo.P_ii)
    R_ib = apply(k.coef, geo.P_ib)
    return np.eye(len(geo.interior)) - R_ii, R_ib


def passage_from_kernel(k: CellKernel, check: bool = True):
    """g1(0, corner) blocks, rows = origin labels, columns = corner labels (ascending).

    Returns ``(blocks, bad)`` where ``bad`` flags nodes whose system has
    condition number above 1e12. With ``check`` such nodes raise instead;
    without it their blocks are NaN.
    """
    geo = _geometry()
    A, b = passage_system(k)
    v = dual.value(A)
    finite = np.isfinite(v).all(axis=(-2, -1))
    eye = np.eye(v.shape[-1])
    A = dual.where(finite[..., None, None], A, eye)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(dual.value(A))
    bad = ~finite | ~(cond <= COND_LIMIT)
    if check and bad.any():
        raise SingularityError("passage system", float(np.max(np.where(bad, np.inf, cond))), np.flatnonzero(bad))
    A = dual.where(bad[..., None, None], eye, A)
    G = dual.solve(A, b)
    G = dual.where(bad[..., None, None], np.nan, G)
    rows = G[..., geo.origin_rows, :]
    return {name: rows[..., :, geo.corner_cols[name]] for name in CORNERS}, bad


def passage_green(n: int, z, coin: str = "quantum") -> dict[str, object]:
    """g1^(n)(z)(0, corner) for the four outer corners; ``z`` may be a jet."""
    if n < 1:
        raise ValueError("passage level must be at least 1")
    from .green import kernel_at_level, sextet_at_level

    if coin == "quantum":
        k = sextet_at_level(z, n - 1).kernel()
    else:
        k = kernel_at_level(z, n - 1, coin)
    return passage_from_kernel(k)[0]


@dataclass
class PassageResult:
    """Quantum passage probabilities and expected times from the origin.

    ``prob[c]`` and ``etime[c]`` are 4x4 (start label, arrival label) arrays
    for corner ``c``.
    """

    level: int
    prob: dict[str, np.ndarray]
    etime: dict[str, np.ndarray]
    imag_residue: float
    excluded: int

    @property
    def total(self) -> np.ndarray:
        """P1(T < ∞) for each start label."""
        return sum(p.sum(axis=-1) for p in self.prob.values())

    @property
    def expected(self) -> np.ndarray:
        """E(T) for each start label (T = ∞ paths carry no weight)."""
        return sum(e.sum(axis=-1) for e in self.etime.values())

    @property
    def conditional(self) -> np.ndarray:
        return self.expected / self.total


def passage_statistics(n: int, grid: CircleGrid | None = None, cap: int = PASSAGE_LEVEL_CAP) -> PassageResult:
    """Parseval integrals of |g1|² and of (z∂g1)·conj(g1) for the quantum walk."""
    if n > cap:
        raise ValueError(f"passage level {n} exceeds cap {cap}")
    if n < 1:
        raise ValueError("passage level must be at least 1")
    grid = grid or CircleGrid()
    samples = sextet_on_circle(n - 1, grid, "quantum", jet=True)
    blocks, bad = passage_from_kernel(samples.kernel, check=False)
    excluded = samples.excluded | bad
    prob, etime, resid = {}, {}, 0.0
    for c, g in blocks.items():
        prob[c] = circle_mean(np.abs(g.val) ** 2, grid, excluded)
        e = circle_mean(g.der * g.val.conj(), grid, excluded)
        resid = max(resid, float(np.abs(e.imag).max()))
        etime[c] = e.real
    return PassageResult(n, prob, etime, resid, int(excluded.sum()))


def passage_probability(n: int, grid: CircleGrid | None = None) -> dict[str, np.ndarray]:
    return passage_statistics(n, grid).prob


def expected_passage_time(n: int, grid: CircleGrid | None = None) -> PassageResult:
    return passage_statistics(n, grid)


def _at_one():
    return dual.seed(np.array(1.0))


def classical_passage(n: int) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Uniform coin at z = 1: corner probabilities and per-channel E(T) contributions."""
    blocks = passage_green(n, _at_one(), "classical")
    prob = {c: g.val.real for c, g in blocks.items()}
    etime = {c: g.der.real for c, g in blocks.items()}
    return prob, etime


def expected_passage_time_at_one(n: int, coin: str = "classical", start: int = 0) -> float:
    """E(T^(n)) for the uniform coin as Σ ∂z g1 at z = 1."""
    if coin != "classical":
        raise ValueError("the z = 1 derivative formula holds for probability kernels only")
    _, etime = classical_passage(n)
    return float(sum(e[start].sum() for e in etime.values()))


def expected_return_time(n: int, start: int = 0) -> float:
    """E(τ^(n)) for the uniform coin: τ stops at the origin or any outer corner."""
    from .green import kernel_at_level

    k = kernel_at_level(_at_one(), n, "classical")
    total = 0.0
    for y in BOUNDARY:
        total += float(reconstruct(k, "0", y).der[start].real.sum())
    return total
