"""Doubled Sierpinski gasket on the skewed integer lattice.

Sites live on points with even coordinate sum. The six unit steps are

    e0=(2,0)  e1=(1,1)  e2=(-1,1)  e3=(-2,0)  e4=(-1,-1)  e5=(1,-1)

and every elementary triangle is a translate of {(0,0), (1,1), (2,0)}.
The upper copy F(n) has corners 0, a_n=(2^n,2^n), b_n=(2^(n+1),0); the
lower copy is its mirror image under ``reflect`` and shares the origin.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

Site = tuple[int, int]

DIRECTIONS: tuple[Site, ...] = ((2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1))
MAX_LEVEL = 12

A_CORNER_OUT = (0, 1, 4, 5)
B_CORNER_OUT = (0, 1, 2, 3)


class LevelCapError(ValueError):
    """Requested level is above the supported cap."""


class OutOfDomainError(ValueError):
    """A step would leave the working lattice."""


class DirectedState(NamedTuple):
    site: Site
    dir: int

    def __str__(self) -> str:
        return f"({self.site[0]},{self.site[1]})^{self.dir}"


def step(site: Site, k: int) -> Site:
    dx, dy = DIRECTIONS[k]
    return (site[0] + dx, site[1] + dy)


def opposite(k: int) -> int:
    return (k + 3) % 6


def direction_of(x: Site, y: Site) -> int | None:
    d = (y[0] - x[0], y[1] - x[1])
    try:
        return DIRECTIONS.index(d)
    except ValueError:
        return None


def reflect(site: Site) -> Site:
    """Mirror map taking F(n) onto F(n)'; it swaps e0<->e5, e1<->e4, e2<->e3."""
    x1, x2 = site
    return ((x1 - 3 * x2) // 2, (-x1 - x2) // 2)


def reflect_dir(k: int) -> int:
    return 5 - k


def corner_a(n: int) -> Site:
    return (2**n, 2**n)


def corner_b(n: int) -> Site:
    return (2 ** (n + 1), 0)


def corners(n: int) -> dict[str, Site]:
    a, b = corner_a(n), corner_b(n)
    return {"0": (0, 0), "a": a, "b": b, "a'": reflect(a), "b'": reflect(b)}


@lru_cache(maxsize=None)
def _cell_origins(n: int) -> tuple[Site, ...]:
    if n == 0:
        return ((0, 0),)
    prev = _cell_origins(n - 1)
    out = []
    for shift in ((0, 0), corner_a(n - 1), corner_b(n - 1)):
        out.extend((p[0] + shift[0], p[1] + shift[1]) for p in prev)
    return tuple(out)


def upper_cells(n: int) -> list[tuple[Site, Site, Site]]:
    """Elementary triangles of F(n), each as (p, p+e1, p+e0)."""
    return [(p, step(p, 1), step(p, 0)) for p in _cell_origins(n)]


@dataclass(frozen=True, eq=False)
class Gasket:
    """F(n) together with its mirror copy, built once and then read-only."""

    level: int
    sites: tuple[Site, ...]
    cells: tuple[tuple[Site, Site, Site], ...]
    out: dict[Site, tuple[int, ...]] = field(repr=False)
    index: dict[Site, int] = field(repr=False)

    @property
    def corner_sites(self) -> dict[str, Site]:
        return corners(self.level)

    @property
    def outer_corners(self) -> tuple[Site, ...]:
        c = self.corner_sites
        return (c["a"], c["b"], c["a'"], c["b'"])

    def __contains__(self, site: Site) -> bool:
        return site in self.index

    def states(self) -> list[DirectedState]:
        return [DirectedState(s, k) for s in self.sites for k in self.out[s]]

    def state_index(self) -> dict[DirectedState, int]:
        return {s: i for i, s in enumerate(self.states())}

    def neighbors(self, site: Site) -> list[Site]:
        return [step(site, k) for k in self.out[site] if step(site, k) in self.index]

    def shift(self, state: DirectedState) -> DirectedState:
        x, k = state
        if k not in self.out.get(x, ()):
            raise ValueError(f"{state} is not a directed state of level {self.level}")
        y = step(x, k)
        if y not in self.index:
            raise OutOfDomainError(f"shift of {state} leaves level {self.level}")
        return DirectedState(y, opposite(k))

    def cell_of(self, x: Site, y: Site) -> tuple[Site, Site, Site] | None:
        """The elementary triangle containing both sites, if any."""
        for c in self._cells_at[x]:
            if y in c:
                return c
        return None

    @property
    def _cells_at(self) -> dict[Site, list[tuple[Site, Site, Site]]]:
        return _incidence(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["x1", "x2", "out_dirs"])
        for s in self.sites:
            w.writerow([s[0], s[1], " ".join(str(k) for k in self.out[s])])
        return buf.getvalue()


@lru_cache(maxsize=32)
def _incidence(g: Gasket) -> dict[Site, list[tuple[Site, Site, Site]]]:
    inc: dict[Site, list] = {s: [] for s in g.sites}
    for c in g.cells:
        for s in c:
            inc[s].append(c)
    return inc


@lru_cache(maxsize=16)
def build_level(n: int, cap: int = MAX_LEVEL) -> Gasket:
    """Construct F(n) ∪ F(n)' with out-direction sets.

    Memory grows like 3^n; levels above ``cap`` raise ``LevelCapError``.
    """
    if n < 0:
        raise ValueError("level must be nonnegative")
    if n > cap:
        raise LevelCapError(f"level {n} exceeds cap {cap}")
    up = upper_cells(n)
    down = [tuple(reflect(s) for s in c) for c in up]
    cells = tuple(up) + tuple(down)
    nbrs: dict[Site, set[int]] = {}
    for c in cells:
        for s in c:
            d = nbrs.setdefault(s, set())
            for t in c:
                if t != s:
                    d.add(direction_of(s, t))
    cs = corners(n)
    # outer corners keep four directions; the two outward ones leave the lattice
    nbrs[cs["a"]] |= set(A_CORNER_OUT)
    nbrs[cs["b"]] |= set(B_CORNER_OUT)
    nbrs[cs["a'"]] |= {reflect_dir(k) for k in A_CORNER_OUT}
    nbrs[cs["b'"]] |= {reflect_dir(k) for k in B_CORNER_OUT}
    sites = tuple(sorted(nbrs))
    out = {s: tuple(sorted(nbrs[s])) for s in sites}
    index = {s: i for i, s in enumerate(sites)}
    return Gasket(n, sites, cells, out, index)


def upper_site_count(n: int) -> int:
    return 3 * (3**n + 1) // 2


def in_upper(site: Site, n: int) -> bool:
    """Membership in F(n) by recursive subdivision."""
    x1, x2 = site
    while n > 0:
        a, b = corner_a(n - 1), corner_b(n - 1)
        if x2 >= a[1]:
            x1, x2 = x1 - a[0], x2 - a[1]
        elif x1 >= b[0]:
            x1 -= b[0]
        n -= 1
    return (x1, x2) in ((0, 0), (1, 1), (2, 0))


CELL_LABELS: dict[str, Site] = {
    "0": (0, 0),
    "1": (1, 1),
    "2": (2, 0),
    "3": (3, 1),
    "4": (4, 0),
    "5": (2, 2),
}


def relabel_cell() -> dict[str, Site]:
    """Labels 0..5 on F(1) and their primed mirror images on F(1)'."""
    labels = dict(CELL_LABELS)
    for k, s in CELL_LABELS.items():
        if k != "0":
            labels[k + "'"] = reflect(s)
    return labels


def out_array(g: Gasket) -> np.ndarray:
    return np.array([g.out[s] for s in g.sites])
