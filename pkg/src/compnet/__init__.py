"""Competitiveness networks from country x activity count data.

Count matrices become binary bipartite networks via revealed comparative
advantage; the networks are scored for nestedness (NODF and temperature),
ranked by fitness/complexity, partitioned into communities, and compared
against maximum-entropy null models that preserve either the density or
all degrees on average.
"""

from .community import (
    PartitionResult,
    Projection,
    modularity,
    modularity_zscore,
    optimize_modularity,
    project,
)
from .errors import BicmConvergenceError, MetricUndefinedError
from .estimators import (
    BipartiteConfigurationModel,
    CoOccurrenceCommunities,
    ErdosRenyiNullModel,
    FitnessComplexityRanking,
    LogCountTransformer,
    RcaBinarizer,
    RcaTransformer,
)
from .matrices import (
    BinaryBipartite,
    CountMatrix,
    RcaMatrix,
    binarize,
    compute_rca,
    density,
    log_transform,
    rca_histogram,
)
from .nestedness import (
    FitnessComplexity,
    NodfResult,
    TemperatureResult,
    fitness_complexity,
    isocline_exponent,
    nodf,
    pack_order,
    temperature,
)
from .nullmodels import (
    BicmModel,
    EnsembleStats,
    ErdosRenyiModel,
    derive_seed,
    ensemble_stats,
    fit_bicm,
    fit_er,
    sample,
    zscore,
    zscore_from_samples,
)
from .pipeline import PipelineConfig, emit, ingest, load_config, run_series, run_year

__version__ = "0.1.0"

__all__ = [
    "BicmConvergenceError",
    "BicmModel",
    "BinaryBipartite",
    "BipartiteConfigurationModel",
    "CoOccurrenceCommunities",
    "CountMatrix",
    "EnsembleStats",
    "ErdosRenyiModel",
    "ErdosRenyiNullModel",
    "FitnessComplexity",
    "FitnessComplexityRanking",
    "LogCountTransformer",
    "MetricUndefinedError",
    "NodfResult",
    "PartitionResult",
    "PipelineConfig",
    "Projection",
    "RcaBinarizer",
    "RcaMatrix",
    "RcaTransformer",
    "TemperatureResult",
    "binarize",
    "compute_rca",
    "density",
    "derive_seed",
    "emit",
    "ensemble_stats",
    "fit_bicm",
    "fit_er",
    "fitness_complexity",
    "ingest",
    "isocline_exponent",
    "load_config",
    "log_transform",
    "modularity",
    "modularity_zscore",
    "nodf",
    "optimize_modularity",
    "pack_order",
    "project",
    "rca_histogram",
    "run_series",
    "run_year",
    "sample",
    "temperature",
    "zscore",
    "zscore_from_samples",
]
