"""Direct solver for cyclic (periodic) pentadiagonal systems.

The matrix is passed by its five wrapped diagonals,
``diags[k + 2, i] == A[i, (i + k) % N]`` for ``k = -2..2``. The
non-wrapping part is factored as an ordinary band matrix (LAPACK ``gbsv``
via :func:`scipy.linalg.solve_banded`) and the six corner entries are
removed with a rank-4 Sherman-Morrison-Woodbury correction.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import LinAlgError, solve_banded
from scipy.sparse.linalg import spsolve

OFFSETS = (-2, -1, 0, 1, 2)

# capacitance matrices worse than this fall back to sparse LU
_COND_MAX = 1e12


def to_dense(diags: np.ndarray) -> np.ndarray:
    N = diags.shape[1]
    A = np.zeros((N, N))
    i = np.arange(N)
    for row, k in enumerate(OFFSETS):
        A[i, (i + k) % N] += diags[row]
    return A


def to_sparse(diags: np.ndarray):
    N = diags.shape[1]
    i = np.arange(N)
    rows = np.concatenate([i] * 5)
    cols = np.concatenate([(i + k) % N for k in OFFSETS])
    return sparse.csc_matrix((diags.ravel(), (rows, cols)), shape=(N, N))


def _split(diags):
    """Band core in LAPACK layout plus the corner (row, col, value) list."""
    N = diags.shape[1]
    ab = np.zeros((5, N))
    corners = []
    for row, k in enumerate(OFFSETS):
        if k >= 0:
            ab[2 - k, k:] = diags[row, :N - k]
            wrapped = range(N - k, N)
        else:
            ab[2 - k, :N + k] = diags[row, -k:]
            wrapped = range(0, -k)
        for i in wrapped:
            corners.append((i, (i + k) % N, diags[row, i]))
    return ab, corners


def solve_cyclic_penta(diags: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``A x = rhs`` for a cyclic pentadiagonal ``A``.

    Parameters
    ----------
    diags : ndarray, shape (5, N)
        Wrapped diagonals, offsets -2..2 in order.
    rhs : ndarray, shape (N,)

    Returns
    -------
    ndarray, shape (N,)
    """
    diags = np.asarray(diags, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    N = diags.shape[1]
    if N < 5:
        return np.linalg.solve(to_dense(diags), rhs)

    ab, corners = _split(diags)
    corner_rows = (0, 1, N - 2, N - 1)
    U = np.zeros((N, 4))
    Vt = np.zeros((4, N))
    for c, r in enumerate(corner_rows):
        U[r, c] = 1.0
    for i, j, v in corners:
        Vt[corner_rows.index(i), j] += v

    try:
        sol = solve_banded((2, 2), ab, np.column_stack([rhs, U]), check_finite=False)
        y, Z = sol[:, 0], sol[:, 1:]
        cap = np.eye(4) + Vt @ Z
        if np.linalg.cond(cap) > _COND_MAX:
            raise LinAlgError("ill-conditioned capacitance matrix")
        return y - Z @ np.linalg.solve(cap, Vt @ y)
    except LinAlgError:
        return spsolve(to_sparse(diags), rhs)
