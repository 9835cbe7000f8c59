"""Count matrices, revealed comparative advantage and binarization.

The chain implemented here turns a country x activity table of nonnegative
weights (citation counts, patent counts, export flows) into a binary
bipartite competitiveness matrix:

    counts -> (optional log damping) -> RCA ratios -> threshold -> 0/1

together with the elementary descriptors of the binary matrix (density,
diversification, ubiquity) and the RCA histogram.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import (
    as_binary_matrix,
    as_rca_matrix,
    as_weight_matrix,
    check_bin_edges,
    check_identifiers,
    frozen,
)


@dataclass(frozen=True)
class CountMatrix:
    """Dense nonnegative country x activity weights for one layer-year.

    Parameters
    ----------
    rows : sequence of str
        Country identifiers, no duplicates.
    cols : sequence of str
        Activity identifiers, no duplicates.
    W : 2-D array
        Nonnegative finite weights, shape (len(rows), len(cols)).
    layer : str
        Layer label, e.g. "science", "technology", "trade".
    year : int or None
        Calendar year of the snapshot.
    """

    rows: tuple
    cols: tuple
    W: np.ndarray
    layer: str = "other"
    year: int | None = None

    def __post_init__(self):
        W = frozen(as_weight_matrix(self.W))
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "rows", check_identifiers(self.rows, W.shape[0], "rows"))
        object.__setattr__(self, "cols", check_identifiers(self.cols, W.shape[1], "cols"))

    @property
    def shape(self):
        return self.W.shape


@dataclass(frozen=True)
class RcaMatrix:
    """Balassa revealed-comparative-advantage ratios, same shape as the counts."""

    rows: tuple
    cols: tuple
    R: np.ndarray
    source_layer: str = "other"
    year: int | None = None

    def __post_init__(self):
        R = frozen(as_rca_matrix(self.R))
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "rows", check_identifiers(self.rows, R.shape[0], "rows"))
        object.__setattr__(self, "cols", check_identifiers(self.cols, R.shape[1], "cols"))

    @property
    def shape(self):
        return self.R.shape


@dataclass(frozen=True)
class BinaryBipartite:
    """0/1 competitiveness matrix with row/column degree profiles.

    ``k_rows`` (diversification) and ``k_cols`` (ubiquity) are derived from
    ``M`` at construction time.
    """

    rows: tuple
    cols: tuple
    M: np.ndarray
    k_rows: np.ndarray = field(init=False)
    k_cols: np.ndarray = field(init=False)

    def __post_init__(self):
        M = frozen(as_binary_matrix(self.M))
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "rows", check_identifiers(self.rows, M.shape[0], "rows"))
        object.__setattr__(self, "cols", check_identifiers(self.cols, M.shape[1], "cols"))
        object.__setattr__(self, "k_rows", frozen(M.sum(axis=1, dtype=np.int64)))
        object.__setattr__(self, "k_cols", frozen(M.sum(axis=0, dtype=np.int64)))

    @property
    def shape(self):
        return self.M.shape

    @property
    def n_links(self):
        return int(self.k_rows.sum())


def default_ids(n_rows, n_cols):
    """Generic identifiers for matrices built from bare arrays."""
    width_r = len(str(max(n_rows - 1, 0)))
    width_c = len(str(max(n_cols - 1, 0)))
    rows = tuple(f"r{i:0{width_r}d}" for i in range(n_rows))
    cols = tuple(f"c{j:0{width_c}d}" for j in range(n_cols))
    return rows, cols


def log_transform(counts):
    """Dampen the skew of raw counts: each weight w becomes log(1 + w).

    Shape, identifiers and the zero pattern are preserved; strict ordering
    of entries is preserved because the map is strictly increasing.
    """
    W = np.log1p(as_weight_matrix(counts))
    return CountMatrix(counts.rows, counts.cols, W, layer=counts.layer, year=counts.year)


def _rca_values(W):
    """Balassa ratios on a bare array; zero row/column sums give zero rows/columns."""
    W = as_weight_matrix(W)
    total = W.sum()
    if total <= 0:
        raise ValueError("cannot compute RCA of an all-zero matrix")
    row_tot = W.sum(axis=1, keepdims=True)
    col_share = W.sum(axis=0, keepdims=True) / total
    with np.errstate(over="ignore"):
        basket = np.divide(W, row_tot, out=np.zeros_like(W), where=row_tot > 0)
        R = np.divide(basket, col_share, out=np.zeros_like(W), where=col_share > 0)
    if not np.isfinite(R).all():
        raise ValueError("RCA overflow: weights span too many orders of magnitude")
    return R


def compute_rca(counts):
    """Revealed comparative advantage of a count matrix.

    Each entry compares the weight of an activity inside a country's own
    basket to the weight of that activity in the global basket:

        R[i, a] = (W[i, a] / sum_b W[i, b]) / (sum_j W[j, a] / sum_jb W[j, b])

    Countries with an empty basket and activities with zero global weight
    yield all-zero rows/columns rather than NaN.
    """
    R = _rca_values(counts.W)
    return RcaMatrix(counts.rows, counts.cols, R, source_layer=counts.layer, year=counts.year)


def _binarize_values(R, threshold):
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    R = as_rca_matrix(R)
    return (R >= threshold).astype(np.int8)


def binarize(rca, threshold=1.0):
    """Threshold RCA values into a binary competitiveness matrix.

    An entry is active when its RCA is greater than or equal to
    ``threshold`` (ties included, the standard Balassa convention).
    """
    M = _binarize_values(rca.R, threshold)
    return BinaryBipartite(rca.rows, rca.cols, M)


def density(bipartite):
    """Fraction of observed links relative to the fully connected bipartite graph."""
    M = as_binary_matrix(bipartite)
    return float(M.sum(dtype=np.int64)) / M.size


def rca_histogram(rca, bin_edges):
    """Histogram of nonzero RCA values.

    Exact zeros are excluded: they mark inactive pairs, dominate every layer
    and are unrepresentable on the log scale the distribution is read on.
    Bins follow ``numpy.histogram`` semantics (half-open, last bin closed);
    values outside the edges are not counted.

    Returns
    -------
    counts : ndarray of int
        One count per bin, ``len(bin_edges) - 1`` entries.
    """
    edges = check_bin_edges(bin_edges)
    R = as_rca_matrix(rca)
    values = R[R > 0]
    counts, _ = np.histogram(values, bins=edges)
    return counts
