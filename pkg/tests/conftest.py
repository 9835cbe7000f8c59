"""Shared generators for synthetic bipartite fixtures."""

import numpy as np
import pytest

from compnet.matrices import BinaryBipartite, default_ids


def make_bipartite(M):
    M = np.asarray(M, dtype=np.int8)
    return BinaryBipartite(*default_ids(*M.shape), M)


def staircase(n):
    """Perfectly nested n x n matrix with all-distinct row and column degrees."""
    M = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        M[i, : n - i] = 1
    return M


def nested_noisy(n_rows, n_cols, fill, noise, rng):
    """Strongly nested matrix at roughly the requested fill, plus flip noise.

    Cells below the anti-diagonal frontier scaled to ``fill`` are 1; a
    fraction ``noise`` of all cells is then flipped.
    """
    x = (np.arange(n_cols) + 0.5) / n_cols
    y = (np.arange(n_rows) + 0.5) / n_rows
    # triangular frontier with area = fill
    M = ((y[:, None] + x[None, :]) < np.sqrt(2.0 * fill)).astype(np.int8)
    flips = rng.random(M.shape) < noise
    M[flips] ^= 1
    return M


def planted_blocks(n_blocks, rows_per, cols_per, rng, p_in=0.7, p_out=0.05):
    """Block-diagonal bipartite matrix with sparse off-block noise."""
    M = np.zeros((n_blocks * rows_per, n_blocks * cols_per), dtype=np.int8)
    for b in range(n_blocks):
        rs = slice(b * rows_per, (b + 1) * rows_per)
        cs = slice(b * cols_per, (b + 1) * cols_per)
        M[rs, cs] = (rng.random((rows_per, cols_per)) < p_in).astype(np.int8)
    M |= (rng.random(M.shape) < p_out).astype(np.int8)
    return M


def brute_nodf(M):
    """Literal pairwise double-loop NODF, kept independent of the library."""
    M = np.asarray(M)

    def one_side(rows):
        k = rows.sum(axis=1)
        total = 0.0
        n = rows.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                kmin = min(k[i], k[j])
                if k[i] != k[j] and kmin > 0:
                    total += float((rows[i] & rows[j]).sum()) / kmin
        return total

    n_r, n_c = M.shape
    pairs = n_r * (n_r - 1) // 2 + n_c * (n_c - 1) // 2
    return 100.0 * (one_side(M) + one_side(M.T)) / pairs


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
