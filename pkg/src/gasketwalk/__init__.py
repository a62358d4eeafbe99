"""Quantum and classical walks on the doubled Sierpinski gasket.

Green functions are computed by cell renormalization; probabilities are
Parseval integrals of those Green functions on the unit circle.
"""

import os

if "GASKETWALK_THREADS" in os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["GASKETWALK_THREADS"])

from .classical import ClassicalTriple, PhiPair, classical_exponents, phi_orbit, triple_orbit  # noqa: E402
from .coin import get_coin, grover_coin, step_matrix, uniform_coin  # noqa: E402
from .green import (  # noqa: E402
    GreenSextet,
    SingularityError,
    initial_sextet,
    iterate,
    kernel_at_level,
    reconstruct,
    sextet_at_level,
)
from .lattice import DirectedState, Gasket, build_level  # noqa: E402
from .observables import (  # noqa: E402
    ExitDistribution,
    delta_eta,
    exit_distribution,
    exponent_beta_gamma,
    recurrence_scan,
)
from .oracle import evolve_absorbing, series_match  # noqa: E402
from .passage import classical_passage, passage_statistics  # noqa: E402
from .quadrature import CircleGrid, QuadratureError, scan_levels  # noqa: E402

__all__ = [
    "CircleGrid",
    "ClassicalTriple",
    "DirectedState",
    "ExitDistribution",
    "Gasket",
    "GreenSextet",
    "PhiPair",
    "QuadratureError",
    "SingularityError",
    "build_level",
    "classical_exponents",
    "classical_passage",
    "delta_eta",
    "evolve_absorbing",
    "exit_distribution",
    "exponent_beta_gamma",
    "get_coin",
    "grover_coin",
    "initial_sextet",
    "iterate",
    "kernel_at_level",
    "passage_statistics",
    "phi_orbit",
    "reconstruct",
    "recurrence_scan",
    "scan_levels",
    "series_match",
    "sextet_at_level",
    "step_matrix",
    "triple_orbit",
    "uniform_coin",
]
