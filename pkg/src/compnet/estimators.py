"""scikit-learn style wrappers around the functional core.

These estimators work on bare 2-D arrays so they compose with
``sklearn.pipeline.Pipeline`` and friends: counts in, log counts, RCA
values, binary matrices out, plus terminal estimators for the
fitness-complexity ranking, null models, and community detection. The
dataclass-based functions elsewhere in the package remain the primary
API; this layer exists for interoperability.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import nullmodels
from .community import optimize_modularity, project
from .matrices import _binarize_values, _rca_values
from .nestedness import fitness_complexity
from .validation import as_binary_matrix, as_weight_matrix


class LogCountTransformer(TransformerMixin, BaseEstimator):
    """Map raw counts w to log(1 + w). Stateless."""

    def fit(self, X, y=None):
        as_weight_matrix(X)
        return self

    def transform(self, X):
        return np.log1p(as_weight_matrix(X))


class RcaTransformer(TransformerMixin, BaseEstimator):
    """Turn a count matrix into Balassa ratios. Stateless.

    Each entry compares an activity's share in its row's basket to the
    activity's share of the grand total; rows or columns summing to zero
    come out as zero.
    """

    def fit(self, X, y=None):
        as_weight_matrix(X)
        return self

    def transform(self, X):
        return _rca_values(X)


class RcaBinarizer(TransformerMixin, BaseEstimator):
    """Threshold RCA values into a binary matrix (ties count as active).

    Parameters
    ----------
    threshold : float, default=1.0
        Activation cutoff; must be positive.
    """

    def __init__(self, threshold=1.0):
        self.threshold = threshold

    def fit(self, X, y=None):
        _binarize_values(X, self.threshold)
        return self

    def transform(self, X):
        return _binarize_values(X, self.threshold)


class FitnessComplexityRanking(BaseEstimator):
    """Nonlinear ranking of rows (fitness) and columns (complexity).

    Attributes
    ----------
    fitness_ : ndarray
        One score per row, mean 1 over nonzero-degree rows; empty rows 0.
    complexity_ : ndarray
        One score per column, same normalization.
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, tol=1e-10, max_iter=1000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        fc = fitness_complexity(X, tol=self.tol, max_iter=self.max_iter)
        self.fitness_ = fc.fitness
        self.complexity_ = fc.complexity
        self.n_iter_ = fc.iterations
        self.converged_ = fc.converged
        return self


class ErdosRenyiNullModel(BaseEstimator):
    """Null model preserving only the matrix density."""

    def fit(self, X, y=None):
        self.model_ = nullmodels.fit_er(as_binary_matrix(X))
        self.p_ = self.model_.p
        return self

    def sample(self, seed=0):
        """One seeded Bernoulli draw, as a binary int array."""
        check_is_fitted(self)
        return np.asarray(nullmodels.sample(self.model_, seed).M)


class BipartiteConfigurationModel(BaseEstimator):
    """Null model preserving every row and column degree on average.

    Attributes
    ----------
    P_ : ndarray
        Cell link probabilities.
    x_, y_ : ndarray
        Row/column multipliers; NaN where the degree already pins the
        whole row/column.
    residual_ : float
        Largest absolute degree mismatch at the last iteration.
    n_iter_ : int
    """

    def __init__(self, tol=1e-8, max_iter=10000, damping=0.5):
        self.tol = tol
        self.max_iter = max_iter
        self.damping = damping

    def fit(self, X, y=None):
        self.model_ = nullmodels.fit_bicm(
            as_binary_matrix(X),
            tol=self.tol, max_iter=self.max_iter, damping=self.damping,
        )
        self.P_ = self.model_.P
        self.x_ = self.model_.x
        self.y_ = self.model_.y
        self.residual_ = self.model_.residual
        self.n_iter_ = self.model_.iterations
        return self

    def sample(self, seed=0):
        """One seeded Bernoulli draw, as a binary int array."""
        check_is_fitted(self)
        return np.asarray(nullmodels.sample(self.model_, seed).M)


class CoOccurrenceCommunities(ClusterMixin, BaseEstimator):
    """Communities of one side of a binary bipartite matrix.

    Projects onto the chosen side (shared-partner counts, optionally
    normalized by the smaller degree) and maximizes modularity greedily
    from several shuffled restarts.

    Attributes
    ----------
    labels_ : ndarray
        Community of each projected node, numbered by first appearance.
    modularity_ : float
    n_communities_ : int
    """

    def __init__(self, side="rows", normalized=False, restarts=10, random_state=0):
        self.side = side
        self.normalized = normalized
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        A = project(as_binary_matrix(X), side=self.side, normalized=self.normalized)
        result = optimize_modularity(A, restarts=self.restarts, seed=self.random_state)
        self.labels_ = result.labels
        self.modularity_ = result.modularity
        self.n_communities_ = result.n_communities
        return self
