import numpy as np
import pytest
from hypothesis import given, strategies as st

from gasketwalk.oracle import (
    ResourceCapError,
    evolve_absorbing,
    parse_start,
    passage_series_match,
    series_match,
)


@pytest.mark.parametrize("coin", ["quantum", "classical"])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_series_match(n, coin):
    assert series_match(n, 14, coin) < 1e-9


@pytest.mark.parametrize("n", [1, 2])
def test_passage_series_match(n):
    assert passage_series_match(n, 14) < 1e-9


@given(st.integers(1, 3), st.sampled_from([0, 1, 4, 5]), st.sampled_from(["tau", "T"]))
def test_mass_balance(n, d, stop):
    run = evolve_absorbing(n, d, 120, "quantum", stop)
    assert run.mass_balance().max() < 1e-10


def test_classical_probability_conserved():
    run = evolve_absorbing(2, 0, 80, "classical")
    assert np.allclose(run.survivor_norm + run.absorbed_mass("classical"), 1)


def test_parse_start():
    s = parse_start("0,0,e4")
    assert s.site == (0, 0) and s.dir == 4
    with pytest.raises(ValueError):
        parse_start("0,0")


def test_caps():
    with pytest.raises(ResourceCapError):
        evolve_absorbing(5, 0, 10)
    with pytest.raises(ResourceCapError):
        evolve_absorbing(1, 0, 1000)
