"""Maximum-entropy null models for binary bipartite matrices.

Two models are provided, both parametrized by a link-probability matrix P:

* Erdos-Renyi: every cell carries the same probability, the observed
  density. Only the total number of links is preserved on average.
* Bipartite configuration model: one multiplier per row and per column,
  fitted so that every row and column degree is preserved on average.

``sample`` draws independent Bernoulli matrices from either model, and
``ensemble_stats`` turns a batch of draws into z-scores for arbitrary
scalar metrics.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .errors import BicmConvergenceError, MetricUndefinedError
from .matrices import BinaryBipartite, default_ids
from .validation import as_binary_matrix, frozen


def derive_seed(master_seed, index):
    """Child seed for stream ``index`` under ``master_seed``.

    Hashes the pair through numpy's seed-sequence mixing, so nearby indices
    give statistically independent streams and the mapping is stable across
    platforms. Both arguments must be non-negative integers.
    """
    ss = np.random.SeedSequence((int(master_seed), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _matrix_ids(bipartite, shape):
    rows = getattr(bipartite, "rows", None)
    cols = getattr(bipartite, "cols", None)
    if rows is None or cols is None:
        return default_ids(*shape)
    return tuple(rows), tuple(cols)


@dataclass(frozen=True)
class ErdosRenyiModel:
    """Homogeneous Bernoulli model at the observed density."""

    rows: tuple
    cols: tuple
    p: float
    P: np.ndarray

    name = "er"

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_cols(self):
        return len(self.cols)


@dataclass(frozen=True)
class BicmModel:
    """Degree-preserving Bernoulli model.

    P[i, a] = x[i] y[a] / (1 + x[i] y[a]) with multipliers fitted to the
    observed degrees. Rows and columns whose degree pins them completely
    (empty, full, or forced by a cascade of such constraints) are resolved
    exactly before fitting; their multiplier entries are NaN since P there
    is 0 or 1 regardless.
    """

    rows: tuple
    cols: tuple
    P: np.ndarray
    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int

    name = "bicm"

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_cols(self):
        return len(self.cols)


def fit_er(bipartite):
    """Erdos-Renyi model matching the observed density."""
    M = as_binary_matrix(bipartite)
    rows, cols = _matrix_ids(bipartite, M.shape)
    p = float(M.mean())
    return ErdosRenyiModel(rows=rows, cols=cols, p=p, P=frozen(np.full(M.shape, p)))


def _pin_degenerate(M, P, target_r, target_c, free_r, free_c):
    """Resolve rows/columns whose degree forces all their cells.

    A free row whose remaining degree equals the number of free columns
    links to all of them with probability 1 (decrementing their targets);
    one with remaining degree 0 links to none. Columns symmetric. Repeats
    until stable, since each pin can force new ones.
    """
    progress = True
    while progress:
        progress = False
        n_free_c = int(free_c.sum())
        sel_full = free_r & (target_r == n_free_c) & (n_free_c > 0)
        sel_empty = free_r & (target_r == 0) if n_free_c else free_r.copy()
        if sel_full.any():
            P[np.ix_(sel_full, free_c)] = 1.0
            target_c[free_c] -= int(sel_full.sum())
            free_r &= ~sel_full
            progress = True
        if sel_empty.any():
            P[np.ix_(sel_empty, free_c)] = 0.0
            free_r &= ~sel_empty
            progress = True
        n_free_r = int(free_r.sum())
        sel_full = free_c & (target_c == n_free_r) & (n_free_r > 0)
        sel_empty = free_c & (target_c == 0) if n_free_r else free_c.copy()
        if sel_full.any():
            P[np.ix_(free_r, sel_full)] = 1.0
            target_r[free_r] -= int(sel_full.sum())
            free_c &= ~sel_full
            progress = True
        if sel_empty.any():
            P[np.ix_(free_r, sel_empty)] = 0.0
            free_c &= ~sel_empty
            progress = True


def _bernoulli_probs(t):
    # t / (1 + t) with the overflow of huge multipliers saturating at 1
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(np.isfinite(t), t / (1.0 + t), 1.0)


def fit_bicm(bipartite, tol=1e-8, max_iter=10000, damping=0.5):
    """Bipartite configuration model preserving all degrees on average.

    Degenerate rows/columns (empty, full, or forced once others are pinned)
    are resolved exactly; the rest are fitted by a damped multiplicative
    fixed-point iteration on the row and column multipliers, stopping when
    the largest absolute degree mismatch falls below ``tol``. ``damping``
    is the weight kept on the previous iterate at each update.

    Raises
    ------
    BicmConvergenceError
        If the residual is still above ``tol`` after ``max_iter``
        iterations. The exception carries the final residual.
    """
    M = as_binary_matrix(bipartite)
    rows, cols = _matrix_ids(bipartite, M.shape)
    n_r, n_c = M.shape
    if not 0.0 <= damping < 1.0:
        raise ValueError("damping must lie in [0, 1)")

    P = np.full(M.shape, np.nan)
    target_r = M.sum(axis=1, dtype=np.int64)
    target_c = M.sum(axis=0, dtype=np.int64)
    free_r = np.ones(n_r, dtype=bool)
    free_c = np.ones(n_c, dtype=bool)
    _pin_degenerate(M, P, target_r, target_c, free_r, free_c)

    x_full = np.full(n_r, np.nan)
    y_full = np.full(n_c, np.nan)
    residual = 0.0
    iterations = 0
    if free_r.any() and free_c.any():
        r = target_r[free_r].astype(np.float64)
        c = target_c[free_c].astype(np.float64)
        scale = np.sqrt(r.sum())
        x = r / scale
        y = c / scale
        converged = False
        for iterations in range(1, max_iter + 1):
            P_red = _bernoulli_probs(np.outer(x, y))
            x_new = x * r / P_red.sum(axis=1)
            x = damping * x + (1.0 - damping) * x_new
            P_red = _bernoulli_probs(np.outer(x, y))
            y_new = y * c / P_red.sum(axis=0)
            y = damping * y + (1.0 - damping) * y_new
            P_red = _bernoulli_probs(np.outer(x, y))
            residual = max(
                np.abs(P_red.sum(axis=1) - r).max(),
                np.abs(P_red.sum(axis=0) - c).max(),
            )
            if residual < tol:
                converged = True
                break
        if not converged:
            raise BicmConvergenceError(
                f"degree residual {residual:.3e} above {tol:.1e} "
                f"after {max_iter} iterations",
                residual=float(residual),
            )
        P[np.ix_(free_r, free_c)] = P_red
        x_full[free_r] = x
        y_full[free_c] = y

    return BicmModel(
        rows=rows,
        cols=cols,
        P=frozen(P),
        x=frozen(x_full),
        y=frozen(y_full),
        residual=float(residual),
        iterations=iterations,
    )


def sample(model, seed):
    """One Bernoulli draw from a fitted model, as a binary bipartite matrix.

    Equal seeds give bitwise-equal draws; distinct seeds give independent
    streams (use ``derive_seed`` to spawn them from one master seed).
    """
    rng = np.random.default_rng(seed)
    draw = (rng.random(model.P.shape) < model.P).astype(np.int8)
    return BinaryBipartite(model.rows, model.cols, draw)


def zscore_from_samples(value, samples):
    """z of ``value`` against already-computed null values.

    Uses the unbiased (ddof=1) standard deviation. Returns None when the
    z-score is undefined: fewer than two samples, or zero spread.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size < 2:
        return None
    std = float(arr.std(ddof=1))
    if std == 0.0:
        return None
    return float((float(value) - arr.mean()) / std)


@dataclass(frozen=True)
class EnsembleStats:
    """z-score of one metric against one null ensemble.

    ``n_samples`` counts the draws where the metric was defined;
    ``n_excluded`` the draws dropped because the metric raised
    MetricUndefinedError. ``z_score`` is None when undefined (zero spread,
    or fewer than two valid samples). ``seed`` is the master seed the
    per-draw seeds were derived from.
    """

    metric_name: str
    model_name: str
    empirical_value: float
    sample_mean: float
    sample_std: float
    z_score: float
    n_samples: int
    n_excluded: int
    seed: int


def _eval_draw(model, metric_items, draw_seed):
    draw = sample(model, draw_seed)
    values = []
    for _, fn in metric_items:
        try:
            values.append(float(fn(draw)))
        except MetricUndefinedError:
            values.append(None)
    return values


def ensemble_stats(bipartite, model, metrics, n_samples=1000, seed=0, n_jobs=1):
    """z-scores of several metrics of one matrix against one null model.

    Draws ``n_samples`` matrices from ``model`` (per-draw seeds derived
    from ``seed``), evaluates every metric on every draw, and compares with
    the metric on the observed matrix. All metrics share the same draws.

    Parameters
    ----------
    metrics : dict
        Maps metric name to a callable taking a binary bipartite matrix
        and returning a float. A callable may raise MetricUndefinedError
        to exclude a draw from its own statistics.
    n_jobs : int
        Passed to joblib. Results are indexed by draw, so the output is
        identical for any worker count.

    Returns
    -------
    dict mapping metric name to EnsembleStats.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    items = list(metrics.items())
    draw_seeds = [derive_seed(seed, i) for i in range(n_samples)]
    if n_jobs == 1:
        per_draw = [_eval_draw(model, items, s) for s in draw_seeds]
    else:
        per_draw = Parallel(n_jobs=n_jobs)(
            delayed(_eval_draw)(model, items, s) for s in draw_seeds
        )

    out = {}
    for j, (name, fn) in enumerate(items):
        try:
            empirical = float(fn(bipartite))
        except MetricUndefinedError:
            empirical = None
        valid = [row[j] for row in per_draw if row[j] is not None]
        n_valid = len(valid)
        mean = float(np.mean(valid)) if n_valid else float("nan")
        std = float(np.std(valid, ddof=1)) if n_valid > 1 else float("nan")
        z = zscore_from_samples(empirical, valid) if empirical is not None else None
        out[name] = EnsembleStats(
            metric_name=name,
            model_name=model.name,
            empirical_value=empirical,
            sample_mean=mean,
            sample_std=std,
            z_score=z,
            n_samples=n_valid,
            n_excluded=n_samples - n_valid,
            seed=int(seed),
        )
    return out


def zscore(bipartite, model, metric, n_samples=1000, seed=0, n_jobs=1, metric_name=None):
    """z-score of one metric of one matrix against one null model.

    ``metric`` is a callable taking a binary bipartite matrix. Shorthand
    for ``ensemble_stats`` with a single metric; see there for the
    exclusion and undefined-z rules.
    """
    name = metric_name or getattr(metric, "__name__", "metric")
    return ensemble_stats(
        bipartite, model, {name: metric},
        n_samples=n_samples, seed=seed, n_jobs=n_jobs,
    )[name]
