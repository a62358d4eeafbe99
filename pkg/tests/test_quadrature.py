import numpy as np
import pytest
from hypothesis import given, strategies as st

from gasketwalk.quadrature import (
    CircleGrid,
    circle_mean,
    parseval_integral,
    scan_levels,
    sextet_on_circle,
    taylor_coefficients,
)


@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_parseval_polynomial(coefs):
    grid = CircleGrid(64)
    z = grid.z
    p = sum(c * z**k for k, c in enumerate(coefs))
    got = parseval_integral(p[:, None], grid)[0]
    assert abs(got - sum(abs(c) ** 2 for c in coefs)) < 1e-12


@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_taylor_coefficients_recover_polynomial(coefs):
    f = lambda z: sum(c * z**k for k, c in enumerate(coefs))
    got = taylor_coefficients(f, len(coefs) - 1)
    assert np.allclose(got, coefs, atol=1e-12)


@pytest.mark.parametrize("n", [8, 64, 4096])
def test_half_offset_avoids_singular_points(n):
    z = CircleGrid(n).z
    for p in (1, -1, np.exp(2j * np.pi / 3), np.exp(-2j * np.pi / 3)):
        assert np.abs(z - p).min() > 1e-6


def test_no_exclusions_at_level_two():
    s = sextet_on_circle(2, CircleGrid(1024))
    assert s.excluded_count == 0


def test_mc_grid_is_seeded():
    a = CircleGrid(scheme="mc", samples=100, seed=3).theta
    b = CircleGrid(scheme="mc", samples=100, seed=3).theta
    assert np.array_equal(a, b)


def test_scan_matches_direct_levels():
    grid = CircleGrid(512)
    scan = scan_levels(3, grid, chunk=100)
    for n in (1, 2, 3):
        s = sextet_on_circle(n, grid)
        direct = parseval_integral(s.sextet.values, grid, s.excluded)
        assert np.allclose(scan.sextet[n - 1], direct, atol=1e-14)


def test_circle_mean_constant():
    grid = CircleGrid(16)
    assert circle_mean(np.full(16, 2.0), grid) == pytest.approx(2.0)


def test_bad_grid():
    with pytest.raises(ValueError):
        CircleGrid(0)
    with pytest.raises(ValueError):
        CircleGrid(scheme="simpson")
