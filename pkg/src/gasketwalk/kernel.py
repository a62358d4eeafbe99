"""Reduced transition kernels on cells.

For a coin of the form aI + bJ every renormalized kernel is fixed by nine
numbers. Take sites x != y of one triangle with third corner w.

* A start label at x is *out* (points outside the triangle), *third*
  (points at w) or *target* (points at y).
* An arrival label at y is *near* (points back at x) or *far* (points at w).
* A return x -> x ends on the *same* label, the *swap* label (the other
  direction into the same triangle) or a *cross* label (other triangle).

The coefficient vector is ordered as ``SLOTS``. Kernel matrices on any
lattice are linear in it, so they are built from constant 0/1 patterns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import dual
from .coin import coin_weights
from .lattice import DirectedState, Gasket, build_level, step

SLOTS = (
    "out_near",
    "out_far",
    "third_near",
    "third_far",
    "target_near",
    "target_far",
    "same",
    "swap",
    "cross",
)


@dataclass(frozen=True)
class CellKernel:
    """Nine kernel coefficients, batched over the leading axes."""

    coef: object  # ndarray or Dual, shape (..., 9)
    level: int = 0

    @classmethod
    def initial(cls, z, coin: np.ndarray) -> "CellKernel":
        """The one-step kernel z·(coin then shift)."""
        d, o = coin_weights(coin)
        one = dual.linear(lambda v: np.zeros(np.shape(v) + (9,), dtype=complex), z)
        basis = np.zeros(9, dtype=complex)
        basis[SLOTS.index("out_near")] = o
        basis[SLOTS.index("third_near")] = o
        basis[SLOTS.index("target_near")] = d
        coef = one + dual.linear(lambda v: v[..., None] * basis, z)
        return cls(coef, 0)

    def slot(self, name: str):
        return self.coef[..., SLOTS.index(name)]


def _cell_groups(lattice: Gasket, x) -> dict[int, int]:
    """Group index of each out-direction at x (directions into one cell share a group)."""
    groups: dict[int, int] = {}
    cells = [c for c in lattice.cells if x in c]
    for k in lattice.out[x]:
        nb = step(x, k)
        for g, c in enumerate(cells):
            if nb in c:
                groups[k] = g
                break
        else:
            groups[k] = len(cells)
    return groups


def pattern(lattice: Gasket, rows: Sequence[DirectedState], cols: Sequence[DirectedState]) -> np.ndarray:
    """0/1 tensor P with kernel[a, b] = sum_p coef[p] * P[p, a, b]."""
    P = np.zeros((9, len(rows), len(cols)))
    col_pos: dict = {}
    for b, (y, j) in enumerate(cols):
        col_pos.setdefault(y, []).append((b, j))
    for a, (x, i) in enumerate(rows):
        nb = step(x, i)
        for y, entries in col_pos.items():
            if y == x:
                groups = _cell_groups(lattice, x)
                for b, j in entries:
                    if j == i:
                        P[SLOTS.index("same"), a, b] = 1
                    elif groups[j] == groups[i]:
                        P[SLOTS.index("swap"), a, b] = 1
                    else:
                        P[SLOTS.index("cross"), a, b] = 1
                continue
            cell = lattice.cell_of(x, y)
            if cell is None:
                continue
            (w,) = [s for s in cell if s not in (x, y)]
            start = "target" if nb == y else "third" if nb == w else "out"
            for b, j in entries:
                back = step(y, j)
                if back == x:
                    P[SLOTS.index(start + "_near"), a, b] = 1
                elif back == w:
                    P[SLOTS.index(start + "_far"), a, b] = 1
    return P


def apply(coef, P: np.ndarray):
    """Contract coefficients (..., 9) with a pattern (9, R, C)."""
    flat = P.reshape(P.shape[0], -1)
    return dual.linear(lambda v: (v @ flat).reshape(v.shape[:-1] + P.shape[1:]), coef)


def states_of(lattice: Gasket, sites) -> list[DirectedState]:
    return [DirectedState(s, k) for s in sites for k in lattice.out[s]]


@lru_cache(maxsize=64)
def site_pattern(level: int, x, y) -> np.ndarray:
    """Pattern for the block between two sites of the level-``level`` lattice."""
    g = build_level(level)
    return pattern(g, states_of(g, [x]), states_of(g, [y]))


def block(k: CellKernel | object, x, y, level: int = 0):
    """4x4 kernel block between two sites, rows and columns in ascending label order."""
    coef = k.coef if isinstance(k, CellKernel) else k
    return apply(coef, site_pattern(level, tuple(x), tuple(y)))
