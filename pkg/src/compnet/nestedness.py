"""Nestedness metrics and the fitness-complexity ranking.

Two complementary measures are provided for a binary bipartite matrix:

* NODF ("overlap and decreasing fill"): order-free, built from pairwise
  overlaps between rows and between columns with strictly decreasing
  degrees, scaled to [0, 100].
* Nestedness temperature: order-dependent; the matrix is packed (by
  default with the fitness-complexity ranking), mapped onto the unit
  square, and scored by how far unexpected presences/absences sit from
  the isocline of perfect nestedness at the observed fill.

The fitness-complexity ranking itself (a nonlinear iterative scheme that
rewards diversified rows and penalizes ubiquitous columns) is exposed both
for packing and as a metric in its own right.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.special import gammaln

from .errors import MetricUndefinedError
from .matrices import BinaryBipartite
from .validation import as_binary_matrix, check_permutation


@dataclass(frozen=True)
class NodfResult:
    """NODF decomposition: total, row part, column part, and pair counts."""

    nodf_total: float
    nodf_rows: float
    nodf_cols: float
    pair_counts: tuple  # (row pairs, column pairs)


@dataclass(frozen=True)
class FitnessComplexity:
    """Converged fitness/complexity vectors.

    Fitness (rows) and complexity (columns) are mean-normalized to 1 over
    the rows/columns that take part in the iteration; zero-degree rows and
    columns are excluded from the iteration and reported as exactly 0.
    """

    fitness: np.ndarray
    complexity: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class TemperatureResult:
    """Nestedness temperature of a packed matrix.

    ``unexpectedness`` is the mean squared normalized diagonal distance of
    unexpected cells from the isocline; ``temperature`` rescales it by the
    maximal-disorder calibration constant and clips to [0, 100].
    ``row_order``/``col_order`` hold the packing actually used, as original
    indices restricted to nonzero-degree rows/columns.
    """

    temperature: float
    unexpectedness: float
    row_order: tuple
    col_order: tuple
    fill: float
    isocline_exponent: float
    u_max: float
    n_dropped_rows: int = 0
    n_dropped_cols: int = 0


@lru_cache(maxsize=4)
def _strict_upper_pairs(n):
    ii, jj = np.triu_indices(n, k=1)
    return ii.astype(np.intp), jj.astype(np.intp)


def _pair_overlap_sum(M, k):
    """Sum of C_ij / min(k_i, k_j) over index pairs with distinct nonzero degrees."""
    C = M @ M.T  # float32 overlaps are exact integers here
    ii, jj = _strict_upper_pairs(len(k))
    ki, kj = k[ii], k[jj]
    kmin = np.minimum(ki, kj)
    use = (ki != kj) & (kmin > 0)
    return float((C[ii[use], jj[use]].astype(np.float64) / kmin[use]).sum())


def nodf(bipartite):
    """NODF of a binary bipartite matrix, scaled to [0, 100].

    For every pair of rows with strictly decreasing degree the pair
    contributes its overlap divided by the smaller degree; likewise for
    columns. Pairs with tied degrees or an empty member contribute zero
    (decreasing fill). The two sums are normalized by the total number of
    row pairs plus column pairs.

    Raises
    ------
    MetricUndefinedError
        If the matrix is 1 x 1 (no pairs exist on either side).
    """
    M = as_binary_matrix(bipartite).astype(np.float32)
    n_r, n_c = M.shape
    row_pairs = n_r * (n_r - 1) // 2
    col_pairs = n_c * (n_c - 1) // 2
    if row_pairs + col_pairs == 0:
        raise MetricUndefinedError("NODF needs at least one row pair or column pair")
    k_rows = M.sum(axis=1, dtype=np.int64)
    k_cols = M.sum(axis=0, dtype=np.int64)
    s_rows = _pair_overlap_sum(M, k_rows) if row_pairs else 0.0
    s_cols = _pair_overlap_sum(M.T, k_cols) if col_pairs else 0.0
    return NodfResult(
        nodf_total=100.0 * (s_rows + s_cols) / (row_pairs + col_pairs),
        nodf_rows=100.0 * s_rows / row_pairs if row_pairs else 0.0,
        nodf_cols=100.0 * s_cols / col_pairs if col_pairs else 0.0,
        pair_counts=(row_pairs, col_pairs),
    )


def fitness_complexity(bipartite, tol=1e-10, max_iter=1000):
    """Fitness-complexity ranking of rows (fitness) and columns (complexity).

    Starting from all ones, one iteration computes

        F~[i] = sum_a M[i, a] * Q[a]
        Q~[a] = 1 / sum_i M[i, a] / F[i]

    from the previous iterate, then normalizes both vectors to mean 1.
    Iteration stops when the maximum relative change of both vectors drops
    below ``tol`` or after ``max_iter`` iterations. Zero-degree rows and
    columns are removed from the iteration and reported as 0.

    Raises
    ------
    ValueError
        If the matrix has no links at all.
    """
    M = as_binary_matrix(bipartite)
    if M.sum(dtype=np.int64) == 0:
        raise ValueError("fitness-complexity ranking needs at least one link")
    keep_r = M.sum(axis=1) > 0
    keep_c = M.sum(axis=0) > 0
    A = sparse.csr_matrix(M[np.ix_(keep_r, keep_c)].astype(np.float64))
    At = sparse.csr_matrix(A.T)

    # degenerate matrices drive some entries to 0 geometrically; a floor far
    # below any meaningful scale keeps the reciprocals finite without
    # disturbing the ranking
    floor = 1e-280
    F = np.ones(A.shape[0])
    Q = np.ones(A.shape[1])
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        F_new = A @ Q
        Q_new = 1.0 / (At @ (1.0 / F))
        F_new = np.maximum(F_new / F_new.mean(), floor)
        Q_new = np.maximum(Q_new / Q_new.mean(), floor)
        delta = max(np.abs(F_new / F - 1.0).max(), np.abs(Q_new / Q - 1.0).max())
        F, Q = F_new, Q_new
        if delta < tol:
            converged = True
            break

    fitness = np.zeros(M.shape[0])
    complexity = np.zeros(M.shape[1])
    fitness[keep_r] = F
    complexity[keep_c] = Q
    return FitnessComplexity(fitness, complexity, iterations, converged)


def pack_order(bipartite, method="fitness_complexity", tol=1e-10, max_iter=1000):
    """Row/column permutations that pack the matrix toward its nested shape.

    Rows are sorted by descending fitness (``fitness_complexity``) or by
    descending degree (``degree``); columns by ascending complexity or by
    descending ubiquity. Ties keep the original index order.

    Returns
    -------
    (row_order, col_order) : pair of int arrays
    """
    M = as_binary_matrix(bipartite)
    if method == "fitness_complexity":
        fc = fitness_complexity(M, tol=tol, max_iter=max_iter)
        row_key = -fc.fitness
        col_key = fc.complexity
    elif method == "degree":
        row_key = -M.sum(axis=1, dtype=np.int64)
        col_key = -M.sum(axis=0, dtype=np.int64)
    else:
        raise ValueError(f"unknown packing method: {method!r}")
    return (
        np.argsort(row_key, kind="stable"),
        np.argsort(col_key, kind="stable"),
    )


def isocline_exponent(fill, tol=1e-9, max_iter=200):
    """Exponent p of the isocline x**p + y**p = 1 enclosing area ``fill``.

    The enclosed area is Gamma(1+1/p)**2 / Gamma(1+2/p), strictly increasing
    in p, so p is found by bisection on log10(p) until the area matches
    ``fill`` to within ``tol``.
    """
    if not 0.0 < fill < 1.0:
        raise ValueError("fill must lie strictly between 0 and 1")
    lo, hi = -12.0, 12.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _isocline_area(10.0**mid) < fill:
            lo = mid
        else:
            hi = mid
        p = 10.0 ** (0.5 * (lo + hi))
        if abs(_isocline_area(p) - fill) < tol:
            return p
    raise RuntimeError("isocline exponent search did not reach the area tolerance")


def _isocline_area(p):
    return float(np.exp(2.0 * gammaln(1.0 + 1.0 / p) - gammaln(1.0 + 2.0 / p)))


def _isocline_height(x, p):
    """y on the isocline at abscissa x: (1 - x**p)**(1/p)."""
    return (1.0 - np.minimum(x, 1.0) ** p) ** (1.0 / p)


@lru_cache(maxsize=4)
def _diagonal_index(n_rows, n_cols):
    """Unique 45-degree cell diagonals of an R x C grid on the unit square.

    Cells (i, a) with equal i*C - a*R share a diagonal, hence an isocline
    crossing. Returns the unique keys and each cell's index into them.
    """
    i = np.arange(n_rows, dtype=np.int64)[:, None]
    a = np.arange(n_cols, dtype=np.int64)[None, :]
    uniq, inverse = np.unique(i * n_cols - a * n_rows, return_inverse=True)
    return uniq, inverse.reshape(n_rows, n_cols).astype(np.int32)


def _diagonal_crossings(offsets, p, n_steps=60):
    """Abscissa u where the 45-degree diagonal y = x + c meets the isocline.

    Solves f_p(u) - u = c for each offset c in (-1, 1); f_p(u) - u is
    strictly decreasing from 1 to -1, so bisection on [0, 1] converges for
    every offset. Cells on a common diagonal share this solution.
    """
    lo = np.zeros_like(offsets)
    hi = np.ones_like(offsets)
    for _ in range(n_steps):
        mid = 0.5 * (lo + hi)
        above = _isocline_height(mid, p) - mid > offsets
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def temperature(bipartite, ordering=None, u_max=0.04145, fc_tol=1e-10, fc_max_iter=1000):
    """Nestedness temperature of a packed binary matrix, in [0, 100].

    Zero-degree rows/columns are dropped (packing is ill-defined for them)
    and reported. The remaining matrix is packed with ``ordering`` (a
    ``(row_order, col_order)`` permutation pair over the full index range)
    or, when ``ordering`` is None, with the fitness-complexity packing.
    Cell (i, a) of the packed matrix is mapped to ((a+0.5)/n_c, (i+0.5)/n_r)
    on the unit square; the isocline of perfect nestedness at the observed
    fill separates the expected-presence region (toward the packed corner)
    from the expected-absence region. A 0 on the presence side or a 1 on
    the absence side contributes the squared ratio of its diagonal distance
    from the isocline to the full diagonal length through its position;
    expected cells contribute 0. The mean contribution U is rescaled by the
    maximal-disorder constant ``u_max`` and clipped to [0, 100].

    Degenerate fills (no links, or no absences after dropping empty
    rows/columns) have no unexpected cells and return temperature 0.
    """
    M = as_binary_matrix(bipartite)
    n_r, n_c = M.shape
    links = int(M.sum(dtype=np.int64))
    if links == 0:
        return TemperatureResult(0.0, 0.0, (), (), 0.0, np.nan, u_max, n_r, n_c)

    keep_r = np.flatnonzero(M.sum(axis=1) > 0)
    keep_c = np.flatnonzero(M.sum(axis=0) > 0)
    n_dropped_rows = n_r - keep_r.size
    n_dropped_cols = n_c - keep_c.size
    A = M[np.ix_(keep_r, keep_c)]

    if ordering is None:
        row_order, col_order = pack_order(A, "fitness_complexity", tol=fc_tol, max_iter=fc_max_iter)
    else:
        full_rows = check_permutation(ordering[0], n_r, "row ordering")
        full_cols = check_permutation(ordering[1], n_c, "col ordering")
        # restrict the full-index permutations to the kept rows/columns
        pos_r = np.full(n_r, -1, dtype=np.int64)
        pos_r[keep_r] = np.arange(keep_r.size)
        pos_c = np.full(n_c, -1, dtype=np.int64)
        pos_c[keep_c] = np.arange(keep_c.size)
        row_order = pos_r[full_rows[np.isin(full_rows, keep_r)]]
        col_order = pos_c[full_cols[np.isin(full_cols, keep_c)]]

    packed = A[np.ix_(row_order, col_order)]
    R, C = packed.shape
    fill = links / packed.size
    order_rows = tuple(int(i) for i in keep_r[row_order])
    order_cols = tuple(int(j) for j in keep_c[col_order])
    if fill >= 1.0:
        return TemperatureResult(
            0.0, 0.0, order_rows, order_cols, 1.0, np.nan, u_max,
            n_dropped_rows, n_dropped_cols,
        )

    p = isocline_exponent(fill)
    x = (np.arange(C) + 0.5) / C
    y = (np.arange(R) + 0.5) / R
    boundary = _isocline_height(x, p)
    present = packed == 1
    inside = y[:, None] < boundary[None, :]  # presence expected here
    unexpected = present != inside

    flat = np.flatnonzero(unexpected.ravel())
    if flat.size == 0:
        U = 0.0
    else:
        uniq, inverse = _diagonal_index(R, C)
        uniq_offsets = (uniq + 0.5 * (C - R)) / (R * C)
        cell_diag = inverse.ravel()[flat]
        need = np.unique(cell_diag)  # solve only diagonals that carry a cell
        crossings = np.full(uniq_offsets.size, np.nan)
        crossings[need] = _diagonal_crossings(uniq_offsets[need], p)
        ii, aa = np.divmod(flat, C)
        xs = x[aa]
        offsets = y[ii] - xs
        along = crossings[cell_diag] - xs
        U = float(((along / (1.0 - np.abs(offsets))) ** 2).sum() / packed.size)
    T = min(100.0, 100.0 * U / u_max)
    return TemperatureResult(
        T, U, order_rows, order_cols, fill, p, u_max, n_dropped_rows, n_dropped_cols
    )
