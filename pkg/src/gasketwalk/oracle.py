"""Brute-force state-vector evolution with absorbing sites.

Used to cross-check the recursion: the amplitude of first arriving at an
absorbing state at time t is the t-th power-series coefficient of the
matching Green function entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coin import get_coin, step_matrix
from .lattice import DirectedState, build_level

STOP_SETS = ("tau", "T")
ORACLE_LEVEL_CAP = 4
ORACLE_STEP_CAP = 200


class ResourceCapError(ValueError):
    """Oracle level or step count above its cap."""


@dataclass
class AbsorbingRun:
    """Exit amplitudes ``exits[state][t]`` and the surviving norm after each step."""

    level: int
    start: DirectedState
    exits: dict[DirectedState, np.ndarray]
    survivor_norm: np.ndarray  # ||ψ_t||² on non-absorbed states, t = 0..steps

    def absorbed_mass(self, coin: str = "quantum") -> np.ndarray:
        """Cumulative exit weight up to each t (|amplitude|² or probability)."""
        if not self.exits:
            return np.zeros_like(self.survivor_norm)
        amps = np.stack(list(self.exits.values()))
        w = np.abs(amps) ** 2 if coin == "quantum" else amps.real
        return np.cumsum(w.sum(axis=0))

    def mass_balance(self) -> np.ndarray:
        """|1 - ||ψ_t||² - Σ_{s≤t} |exit_s|²| for every t (unitary coin)."""
        return np.abs(1 - self.survivor_norm - self.absorbed_mass())


def absorbing_sites(level: int, stop: str = "tau"):
    """Absorbing sites: 'tau' adds the origin to the four outer corners, 'T' does not."""
    if stop not in STOP_SETS:
        raise ValueError(f"stop must be one of {STOP_SETS}")
    g = build_level(level)
    sites = set(g.outer_corners)
    if stop == "tau":
        sites.add((0, 0))
    return sites


def parse_start(text: str) -> DirectedState:
    """Parse 'x1,x2,eK' (or 'x1,x2,K') into a directed state."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"start must look like '0,0,e0', got {text!r}")
    k = parts[2][1:] if parts[2].startswith("e") else parts[2]
    return DirectedState((int(parts[0]), int(parts[1])), int(k))


def evolve_absorbing(
    level: int, start: DirectedState | int, steps: int, coin: str = "quantum", stop: str = "tau"
) -> AbsorbingRun:
    """Evolve a basis state on F(level) ∪ F(level)' and record absorption.

    ``start`` is a directed state or an out-direction of the origin.
    Absorption applies from t = 1 on. For the uniform coin the vector holds
    probabilities instead of amplitudes and ``survivor_norm`` is the total
    surviving probability.
    """
    if level > ORACLE_LEVEL_CAP or steps > ORACLE_STEP_CAP:
        raise ResourceCapError(f"oracle is capped at level {ORACLE_LEVEL_CAP} and {ORACLE_STEP_CAP} steps")
    g = build_level(level)
    U, leaks = step_matrix(g, get_coin(coin))
    states = g.states()
    idx = {s: n for n, s in enumerate(states)}
    if not isinstance(start, DirectedState):
        start = DirectedState((0, 0), int(start))
    if start not in idx:
        raise ValueError(f"{start} is not a directed state of level {level}")
    sinks = absorbing_sites(level, stop)
    absorb = np.array([s.site in sinks for s in states])
    if np.any(leaks & ~absorb):
        raise RuntimeError("amplitude can leave the lattice from a non-absorbing state")
    psi = np.zeros(len(states), dtype=complex)
    psi[idx[start]] = 1.0
    exits = {s: np.zeros(steps + 1, dtype=complex) for s, a in zip(states, absorb) if a}
    sink_idx = np.flatnonzero(absorb)
    sink_states = [states[k] for k in sink_idx]
    quantum = coin == "quantum"
    norm = np.zeros(steps + 1)
    norm[0] = 1.0
    for t in range(1, steps + 1):
        psi = U @ psi
        for s, k in zip(sink_states, sink_idx):
            exits[s][t] = psi[k]
        psi[sink_idx] = 0
        norm[t] = float(np.sum(np.abs(psi) ** 2)) if quantum else float(psi.real.sum())
    return AbsorbingRun(level, start, exits, norm)


def exit_series(run: AbsorbingRun, corner, t_max: int) -> np.ndarray:
    """4x? array of time series: rows = arrival labels at ``corner`` in ascending order."""
    labels = build_level(run.level).out[corner]
    return np.stack([run.exits[DirectedState(corner, j)][: t_max + 1] for j in labels])


def series_match(level: int, t_max: int = 14, coin: str = "quantum", radius: float = 0.5, nodes: int = 64) -> float:
    """Max deviation between oracle exit amplitudes and Taylor coefficients of g(0, y).

    Compares all five boundary blocks for every start direction, t ≤ t_max.
    """
    from .green import kernel_at_level, reconstruct, sextet_at_level
    from .quadrature import taylor_coefficients

    g = build_level(level)
    names = {"0": (0, 0), "a": g.corner_sites["a"], "b": g.corner_sites["b"], "a'": g.corner_sites["a'"], "b'": g.corner_sites["b'"]}

    def blocks(z):
        if coin == "quantum":
            k = sextet_at_level(z, level).kernel()
        else:
            k = kernel_at_level(z, level, coin)
        return np.stack([reconstruct(k, "0", y) for y in names], axis=1)  # (N, 5, 4, 4)

    coef = taylor_coefficients(blocks, t_max, radius, nodes)  # (T, 5, 4, 4)
    worst = 0.0
    for i, d in enumerate(g.out[(0, 0)]):
        run = evolve_absorbing(level, d, t_max, coin, "tau")
        for b, site in enumerate(names.values()):
            ser = exit_series(run, site, t_max)  # (4, T)
            worst = max(worst, float(np.abs(ser.T - coef[:, b, i, :]).max()))
    return worst


def passage_series_match(level: int, t_max: int = 14, coin: str = "quantum", radius: float = 0.5, nodes: int = 64) -> float:
    """As ``series_match`` for first passage to the outer corners (origin not absorbing)."""
    from .passage import CORNERS, passage_green
    from .quadrature import taylor_coefficients

    g = build_level(level)

    def blocks(z):
        gb = passage_green(level, z, coin)
        return np.stack([gb[c] for c in CORNERS], axis=1)

    coef = taylor_coefficients(blocks, t_max, radius, nodes)
    worst = 0.0
    for i, d in enumerate(g.out[(0, 0)]):
        run = evolve_absorbing(level, d, t_max, coin, "T")
        for b, c in enumerate(CORNERS):
            ser = exit_series(run, g.corner_sites[c], t_max)
            worst = max(worst, float(np.abs(ser.T - coef[:, b, i, :]).max()))
    return worst
