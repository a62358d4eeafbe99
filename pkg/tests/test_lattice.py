import pytest
from hypothesis import given, strategies as st

from gasketwalk.lattice import (
    LevelCapError,
    OutOfDomainError,
    build_level,
    corners,
    direction_of,
    in_upper,
    opposite,
    reflect,
    reflect_dir,
    relabel_cell,
    step,
    upper_site_count,
)


@given(st.integers(0, 6))
def test_site_count(n):
    g = build_level(n)
    assert len(g.sites) == 2 * upper_site_count(n) - 1


@given(st.integers(0, 6))
def test_every_site_has_four_directions(n):
    g = build_level(n)
    assert all(len(g.out[s]) == 4 for s in g.sites)


@given(st.integers(1, 6))
def test_interior_degree_four(n):
    g = build_level(n)
    outer = set(g.outer_corners)
    for s in g.sites:
        if s not in outer:
            assert len(g.neighbors(s)) == 4
        else:
            assert len(g.neighbors(s)) == 2


@given(st.integers(0, 5))
def test_mirror_symmetry(n):
    g = build_level(n)
    for s in g.sites:
        assert reflect(s) in g
        assert g.out[reflect(s)] == tuple(sorted(reflect_dir(k) for k in g.out[s]))


@given(st.integers(0, 5))
def test_upper_membership(n):
    g = build_level(n)
    upper = [s for s in g.sites if in_upper(s, n)]
    assert len(upper) == upper_site_count(n)


@given(st.integers(0, 5), st.integers(0, 5))
def test_step_and_opposite(k, j):
    x = (0, 0)
    assert step(step(x, k), opposite(k)) == x
    assert direction_of(x, step(x, k)) == k


def test_corners():
    c = corners(2)
    assert c["a"] == (4, 4) and c["b"] == (8, 0)
    assert c["a'"] == reflect(c["a"]) == (-4, -4)
    assert c["b'"] == reflect(c["b"]) == (4, -4)


def test_cell_labels():
    lab = relabel_cell()
    assert lab["4"] == (4, 0) and lab["5"] == (2, 2) and lab["4'"] == (2, -2)


@given(st.integers(1, 4))
def test_shift_involution(n):
    g = build_level(n)
    for s in g.states():
        try:
            t = g.shift(s)
        except OutOfDomainError:
            assert s.site in g.outer_corners
            continue
        assert g.shift(t) == s


def test_level_cap():
    with pytest.raises(LevelCapError):
        build_level(13)
