"""Input validation helpers.

All public entry points funnel their array handling through these checks so
that estimators, metric functions and the typed pipeline accept the same
inputs: plain array-likes or the package's own matrix types.
"""

import numpy as np


def as_weight_matrix(X, name="W"):
    """Validate and return a dense 2-D float array of nonnegative weights.

    Accepts any array-like or an object exposing a ``W`` attribute
    (e.g. ``CountMatrix``). Raises ValueError on negative, NaN or infinite
    entries, or if the input is not two-dimensional.
    """
    if hasattr(X, "W"):
        X = X.W
    W = np.asarray(X, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={W.ndim}")
    if W.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(W)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(W < 0):
        raise ValueError(f"{name} contains negative entries")
    return W


def as_rca_matrix(X, name="R"):
    """Validate and return a dense 2-D float array of nonnegative ratios.

    Accepts any array-like or an object exposing an ``R`` attribute
    (e.g. ``RcaMatrix``).
    """
    if hasattr(X, "R"):
        X = X.R
    return as_weight_matrix(X, name=name)


def as_binary_matrix(X, name="M"):
    """Validate and return a dense 2-D 0/1 int8 array.

    Accepts any array-like or an object exposing an ``M`` attribute
    (e.g. ``BinaryBipartite``). Entries must be exactly 0 or 1.
    """
    if hasattr(X, "M"):
        X = X.M
    M = np.asarray(X)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if M.size == 0:
        raise ValueError(f"{name} must be non-empty")
    vals = np.unique(M)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValueError(f"{name} must contain only 0/1 entries")
    return M.astype(np.int8, copy=False)


def check_identifiers(ids, n, name):
    """Validate an identifier list: right length, no duplicates."""
    ids = tuple(str(i) for i in ids)
    if len(ids) != n:
        raise ValueError(f"{name}: expected {n} identifiers, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ValueError(f"{name}: identifiers contain duplicates")
    return ids


def check_bin_edges(edges):
    """Validate histogram bin edges: at least 2, strictly increasing."""
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("bin_edges must be a 1-D sequence of at least 2 edges")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("bin_edges must be strictly increasing")
    return edges


def check_permutation(order, n, name):
    """Validate that ``order`` is a permutation of range(n)."""
    order = np.asarray(order, dtype=np.int64)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError(f"{name} is not a permutation of range({n})")
    return order


def frozen(a):
    """Return a read-only copy of ``a`` (values are shared across threads)."""
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a
