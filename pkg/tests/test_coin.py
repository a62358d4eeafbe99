import numpy as np
import pytest
from hypothesis import given, strategies as st

from gasketwalk.coin import coin_weights, evolution_step, get_coin, grover_coin, phi, step_matrix, uniform_coin
from gasketwalk.kernel import CellKernel, block
from gasketwalk.lattice import DirectedState, build_level, direction_of

WORK_LEVEL = 6


def test_grover_is_unitary_reflection():
    G = grover_coin()
    assert np.allclose(G @ G.T, np.eye(4))
    assert np.allclose(G @ G, np.eye(4))


def test_uniform_is_stochastic():
    assert np.allclose(uniform_coin().sum(axis=0), 1)


def test_unknown_coin():
    with pytest.raises(ValueError):
        get_coin("hadamard")


def test_coin_weights_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        coin_weights(np.diag([1, 2, 3, 4]))


@given(st.integers(0, 2**32 - 1))
def test_norm_preserved_for_50_steps(seed):
    g = build_level(WORK_LEVEL)
    U, _ = step_matrix(g, grover_coin())
    rng = np.random.default_rng(seed)
    states = g.states()
    near = np.array([abs(s.site[0]) + abs(s.site[1]) <= 4 for s in states])
    psi = np.zeros(len(states), dtype=complex)
    psi[near] = rng.normal(size=near.sum()) + 1j * rng.normal(size=near.sum())
    psi /= np.linalg.norm(psi)
    for _ in range(50):
        psi = U @ psi
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_step_matrix_matches_dict_evolution():
    g = build_level(2)
    U, _ = step_matrix(g, grover_coin())
    idx = g.state_index()
    start = DirectedState((0, 0), 1)
    psi = {start: 1.0}
    vec = np.zeros(len(idx), dtype=complex)
    vec[idx[start]] = 1
    for _ in range(3):
        psi = evolution_step(psi, grover_coin(), g)
        vec = U @ vec
    dense = np.zeros(len(idx), dtype=complex)
    for s, a in psi.items():
        dense[idx[s]] = a
    assert np.allclose(dense, vec)


def test_phi_values():
    x = (0, 0)
    assert phi(DirectedState(x, 0), DirectedState((2, 0), 3)) == -0.5
    assert phi(DirectedState(x, 1), DirectedState((2, 0), 3)) == 0.5
    assert phi(DirectedState(x, 1), DirectedState((2, 0), 0)) == 0.0


@pytest.mark.parametrize("coin", ["quantum", "classical"])
def test_kernel_blocks_match_step_matrix(coin):
    g = build_level(1)
    U, _ = step_matrix(g, get_coin(coin))
    U = U.toarray()
    idx = g.state_index()
    k = CellKernel.initial(np.array(1.0), get_coin(coin))
    for x in g.sites:
        for y in g.sites:
            if x == y or direction_of(x, y) is None:
                continue
            B = block(k, x, y, 1)
            M = [[U[idx[DirectedState(y, j)], idx[DirectedState(x, i)]] for j in g.out[y]] for i in g.out[x]]
            assert np.abs(B - np.array(M)).max() == 0
