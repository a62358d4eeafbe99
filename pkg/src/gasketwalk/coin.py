"""Coins, one-step amplitudes and the coined evolution operator.

Coin matrices act on a site's four out-directions, indexed in ascending
direction order. A state ``|x^k>`` after the shift carries the label of
the direction pointing back to where the walker came from.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .lattice import DirectedState, Gasket, OutOfDomainError, direction_of, opposite, step


def grover_coin() -> np.ndarray:
    return np.full((4, 4), 0.5) - np.eye(4)


def uniform_coin() -> np.ndarray:
    return np.full((4, 4), 0.25)


COINS = {"quantum": grover_coin, "classical": uniform_coin}


def get_coin(name: str) -> np.ndarray:
    try:
        return COINS[name]()
    except KeyError:
        raise ValueError(f"unknown coin {name!r}; expected one of {sorted(COINS)}") from None


def coin_weights(coin: np.ndarray) -> tuple[complex, complex]:
    """Return (diagonal, off-diagonal) of a permutation-symmetric coin.

    The reduced cell recursion only applies to coins of the form aI + bJ.
    """
    coin = np.asarray(coin)
    d, o = coin[0, 0], coin[0, 1]
    expect = np.full((4, 4), o, dtype=complex)
    np.fill_diagonal(expect, d)
    if not np.allclose(coin, expect, atol=1e-14):
        raise ValueError("coin is not invariant under direction permutations")
    return complex(d), complex(o)


def phi(src: DirectedState, dst: DirectedState, r: float = 0.5) -> float:
    """One-step amplitude of the Grover-type walk with coin weight r."""
    x, i = src
    y, j = dst
    k = direction_of(x, y)
    if k is None or j != opposite(k):
        return 0.0
    return -r if k == i else r


def evolution_step(
    psi: Mapping[DirectedState, complex], coin: np.ndarray, lattice: Gasket
) -> dict[DirectedState, complex]:
    """Apply the coin at every site and then the shift."""
    out: dict[DirectedState, complex] = {}
    for (x, i), amp in psi.items():
        if amp == 0:
            continue
        dirs = lattice.out[x]
        col = dirs.index(i)
        for row, k in enumerate(dirs):
            c = coin[row, col]
            if c == 0:
                continue
            y = step(x, k)
            if y not in lattice:
                raise OutOfDomainError(f"amplitude at {x} leaves level {lattice.level} along e{k}")
            key = DirectedState(y, opposite(k))
            out[key] = out.get(key, 0) + c * amp
    return out


def step_matrix(lattice: Gasket, coin: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sparse one-step operator over the directed states of ``lattice``.

    Columns for states whose move leaves the lattice are dropped; the
    boolean vector ``leaks`` marks those source states.
    """
    states = lattice.states()
    idx = {s: n for n, s in enumerate(states)}
    rows, cols, vals = [], [], []
    leaks = np.zeros(len(states), dtype=bool)
    for n, (x, i) in enumerate(states):
        dirs = lattice.out[x]
        col = dirs.index(i)
        for row, k in enumerate(dirs):
            y = step(x, k)
            if y not in lattice:
                leaks[n] = True
                continue
            rows.append(idx[DirectedState(y, opposite(k))])
            cols.append(n)
            vals.append(coin[row, col])
    m = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(len(states),) * 2)
    return m, leaks
