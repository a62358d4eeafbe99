"""Classical (uniform-coin) walk: loop generating functions and the Green triple.

``PhiPair`` holds the return and corner-exit generating functions Φ₀, Φ₁
of the walk on one cell. ``ClassicalTriple`` holds the three reduced Green
functions (u1, u2, u3) of the uniform coin: near-corner exit, far-corner
exit and return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .green import SingularityError

LN2 = math.log(2)
DENOM_TOL = 1e-14


@dataclass(frozen=True)
class PhiPair:
    phi0: float
    phi1: float
    level: int = 0
    alpha: float = 0.0
    beta: float = 0.25
    rest: float | None = None  # 1 - Φ₀

    def __post_init__(self):
        if self.rest is None:
            object.__setattr__(self, "rest", 1 - self.phi0)

    @classmethod
    def initial(cls, alpha=Fraction(0), beta=Fraction(1, 4)) -> "PhiPair":
        """Start of the orbit; rational inputs keep the orbit exact."""
        return cls(alpha, beta, 0, alpha, beta)


def phi_iterate(p: PhiPair) -> PhiPair:
    """Advance (Φ₀, Φ₁) by one level.

    Written in s = 1 - Φ₀, where both denominators and the update of s
    factor into products. Works on floats or Fractions; in floats the line
    Φ₀ + 4Φ₁ = 1 is repelling (deviations grow about fivefold per level),
    so deep orbits should be run in exact arithmetic.
    """
    s, f1 = p.rest, p.phi1
    d1 = s + f1
    d2 = s - 2 * f1
    if abs(d1) < DENOM_TOL or abs(d2) < DENOM_TOL:
        raise SingularityError("phi", math.inf, np.array([p.level]))
    den = d1 * d2
    rest = s * (s - 3 * f1) * (s + 2 * f1) / den
    n1 = f1**2 * (s + 2 * f1) / den
    return PhiPair(1 - rest, n1, p.level + 1, p.alpha, p.beta, rest)


def phi_orbit(levels: int, start: PhiPair | None = None) -> list[PhiPair]:
    """[level 0, ..., level ``levels``] starting from ``start`` (default exact (0, 1/4))."""
    p = start or PhiPair.initial()
    out = [p]
    for _ in range(levels):
        p = phi_iterate(p)
        out.append(p)
    return out


@dataclass(frozen=True)
class ClassicalTriple:
    u1: complex | np.ndarray
    u2: complex | np.ndarray
    u3: complex | np.ndarray
    level: int = 0

    @classmethod
    def initial(cls, z=1.0) -> "ClassicalTriple":
        z = np.asarray(z)
        return cls(z / 4, np.zeros_like(z), np.zeros_like(z), 0)

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.u1, self.u2, self.u3), axis=-1)


def _triple_denominator(u1, u2, u3, literal: bool = False):
    # ``literal`` repeats the 2·u1² term in place of 2·u2²; kept only to show
    # that variant does not reproduce the known level-1 probabilities
    sq = u1 if literal else u2
    return (
        2 * u1**2 + 4 * u1 * u2 - 4 * u1 * u3 + u1 + 2 * sq**2 - 4 * u2 * u3 + u2
        - 16 * u3**2 + 8 * u3 - 1
    )


def classical_triple_iterate(t: ClassicalTriple, literal: bool = False) -> ClassicalTriple:
    """One level of the rational triple map (valid at any z)."""
    u1, u2, u3 = t.u1, t.u2, t.u3
    den = _triple_denominator(u1, u2, u3, literal)
    if np.any(np.abs(den) < DENOM_TOL):
        raise SingularityError("triple", math.inf, np.flatnonzero(np.abs(np.atleast_1d(den)) < DENOM_TOL))
    s = u1 + u2
    n1 = -s * (2 * u2**2 + 2 * u1 * u2 + u1 - 4 * u1 * u3) / den
    n2 = -s * (2 * u1**2 + 2 * u1 * u2 + u2 - 4 * u2 * u3) / den
    n3 = (
        6 * u1**2 * u3 - u1**2 + 12 * u1 * u2 * u3 - 2 * u1 * u2 - 4 * u1 * u3**2 + u1 * u3
        + 6 * u2**2 * u3 - u2**2 - 4 * u2 * u3**2 + u2 * u3 - 16 * u3**3 + 8 * u3**2 - u3
    ) / den
    return ClassicalTriple(n1, n2, n3, t.level + 1)


def affine_triple_iterate(t: ClassicalTriple) -> ClassicalTriple:
    """The z = 1 reduction: u1' = .4u1 + .2u2, u2' = .2u1 + .4u2, u3' = .1 + .6u3."""
    return ClassicalTriple(
        0.4 * t.u1 + 0.2 * t.u2, 0.2 * t.u1 + 0.4 * t.u2, 0.1 + 0.6 * t.u3, t.level + 1
    )


def triple_orbit(levels: int, z=1.0, affine: bool = False) -> list[ClassicalTriple]:
    step = affine_triple_iterate if affine else classical_triple_iterate
    t = ClassicalTriple.initial(z)
    out = [t]
    for _ in range(levels):
        t = step(t)
        out.append(t)
    return out


def classical_green_level1(z):
    """Closed-form level-1 blocks g(0, a1) and g(0, 0) of the uniform-coin walk."""
    z = np.asarray(z, dtype=complex)
    den = z**2 + 2 * z - 8
    if np.any(np.abs(den) < DENOM_TOL):
        raise SingularityError("level-1 pole", math.inf, np.flatnonzero(np.abs(np.atleast_1d(den)) < DENOM_TOL))
    u1 = -(z**2) / (2 * den)
    u2 = -(z**3) / (4 * den)
    g0a = np.zeros(z.shape + (4, 4), dtype=complex)
    g0a[..., :, 2] = u1[..., None]
    g0a[..., :, 3] = u2[..., None]
    g00 = np.broadcast_to(u1[..., None, None], z.shape + (4, 4)).copy()
    return g0a, g00


@dataclass(frozen=True)
class ClassicalExponents:
    passage_times: np.ndarray
    return_times: np.ndarray

    @property
    def passage_ratios(self) -> np.ndarray:
        return self.passage_times[1:] / self.passage_times[:-1]

    @property
    def return_ratios(self) -> np.ndarray:
        return self.return_times[1:] / self.return_times[:-1]

    @property
    def d_w(self) -> float:
        """Walk dimension ln(E T ratio)/ln 2 from the deepest pair of levels."""
        return math.log(self.passage_ratios[-1]) / LN2

    @property
    def r_w(self) -> float:
        return math.log(self.return_ratios[-1]) / LN2


def classical_exponents(levels: int = 3) -> ClassicalExponents:
    """Expected passage and return times for levels 1..``levels`` at z = 1."""
    from .passage import expected_return_time, expected_passage_time_at_one

    if levels < 2:
        raise ValueError("need at least two levels for a ratio")
    T = np.array([expected_passage_time_at_one(n, "classical") for n in range(1, levels + 1)])
    tau = np.array([expected_return_time(n) for n in range(1, levels + 1)])
    return ClassicalExponents(T, tau)
