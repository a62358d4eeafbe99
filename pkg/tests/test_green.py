import numpy as np
import pytest
from hypothesis import given, strategies as st

from gasketwalk.green import (
    GreenSextet,
    SingularityError,
    assemble_blocks,
    dense_inverse,
    initial_sextet,
    invert_shifted,
    iterate,
    kernel_blocks,
    poisson_residual,
    dirichlet_solve,
    renormalize,
)

R = 0.5


def closed_forms(z, r=R):
    rz = r * z
    q = rz**4 / (1 + rz)
    return np.stack(
        [rz**3 + rz**2 - q, 2 * rz**3 + 2 * q, 0 * z, -(rz**3) + rz**2 - 3 * q, rz**3 + rz**2 + 3 * q, rz**3 - rz**2 - q],
        axis=-1,
    )


def test_first_iteration_closed_forms(circle64):
    u1 = iterate(initial_sextet(circle64))
    assert np.abs(u1.values - closed_forms(circle64)).max() < 1e-12


def test_first_iteration_at_one():
    u1 = iterate(initial_sextet(np.array([1.0 + 0j])), check=False)
    # z = 1 is a removable point; evaluate just inside the circle
    u = iterate(initial_sextet(np.array([1 - 1e-9 + 0j])))
    assert np.allclose(u.values[0], [1 / 3, 1 / 3, 0, 0, 1 / 2, -1 / 6], atol=1e-7)
    assert u1.values.shape == (1, 6)


def test_singular_node_raises():
    with pytest.raises(SingularityError):
        iterate(initial_sextet(np.array([1.0 + 0j])))


def test_literal_and_geometric_blocks_agree(circle64):
    u = iterate(initial_sextet(circle64))
    assert np.abs(assemble_blocks(u).full() - kernel_blocks(u.kernel()).full()).max() < 1e-14


def test_generic_renormalization_agrees(circle64):
    u = initial_sextet(circle64)
    for _ in range(3):
        a, b = iterate(u), renormalize(u)
        assert np.abs(a.values - b.values).max() < 1e-12
        u = a


sextets = st.lists(
    st.complex_numbers(max_magnitude=0.6, allow_nan=False, allow_infinity=False), min_size=6, max_size=6
)


@given(sextets)
def test_block_inverse_matches_dense(vals):
    blocks = assemble_blocks(GreenSextet(np.array(vals)))
    try:
        inv = invert_shifted(blocks)
    except SingularityError:
        return
    ref = dense_inverse(blocks)
    assert np.abs(inv.full() - ref).max() < 1e-10 * max(1, np.abs(ref).max())


@pytest.mark.parametrize("target", ["0", "4", "5"])
def test_dirichlet_solution_satisfies_poisson(circle64, target):
    u = iterate(initial_sextet(circle64))
    sol = dirichlet_solve(u, target)
    assert np.abs(poisson_residual(u, target, sol)).max() < 1e-12


def test_levels_increment(circle64):
    u = initial_sextet(circle64)
    assert iterate(iterate(u)).level == 2
