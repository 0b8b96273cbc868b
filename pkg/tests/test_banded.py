import numpy as np
import pytest

from thinfilm.banded import solve_cyclic_penta, to_dense, to_sparse


def random_system(N, rng, dominance=6.0):
    d = rng.uniform(-1, 1, (5, N))
    d[2] = dominance + rng.uniform(0, 1, N)
    return d, rng.uniform(-1, 1, N)


@pytest.mark.parametrize("N", [3, 4, 5, 6, 8, 9, 64, 257, 2048])
def test_matches_dense(N):
    rng = np.random.default_rng(N)
    d, b = random_system(N, rng)
    x = solve_cyclic_penta(d, b)
    A = to_dense(d)
    assert np.allclose(x, np.linalg.solve(A, b), rtol=1e-12, atol=1e-12)
    assert np.max(np.abs(A @ x - b)) < 1e-12


def test_dense_and_sparse_layout_agree():
    rng = np.random.default_rng(1)
    d, _ = random_system(10, rng)
    assert np.array_equal(to_dense(d), to_sparse(d).toarray())
    A = to_dense(d)
    # wrapped corner entries
    assert A[0, 8] == d[0, 0] and A[0, 9] == d[1, 0] and A[9, 0] == d[3, 9] and A[9, 1] == d[4, 9]


def test_not_diagonally_dominant():
    # the Jacobian of a stiff step is close to dt/dx^4 times a singular stencil
    N = 128
    sten = np.array([1.0, -4.0, 6.0, -4.0, 1.0])
    d = np.tile(sten[:, None], (1, N)) * 1e8
    d[2] += 1.0
    rng = np.random.default_rng(3)
    b = rng.uniform(-1, 1, N)
    x = solve_cyclic_penta(d, b)
    A = to_dense(d)
    assert np.max(np.abs(A @ x - b)) / np.max(np.abs(b)) < 1e-6
    assert np.allclose(x, np.linalg.solve(A, b), rtol=1e-6, atol=1e-9)


def test_singular_core_falls_back():
    # the band core splits into two odd-length chains with zero diagonal
    # (singular) while the cyclic matrix has symbol cos(2 theta) != 0
    N = 10
    d = np.zeros((5, N))
    d[0] = 0.5
    d[4] = 0.5
    assert abs(np.linalg.det(to_dense(d))) > 1e-3
    b = np.arange(N, dtype=float)
    x = solve_cyclic_penta(d, b)
    assert np.allclose(to_dense(d) @ x, b)
