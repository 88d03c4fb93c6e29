"""Dependence-aware minority oversampling with truncated vine copulas.

The package has three layers:

* copula machinery: bivariate families with rotations (``pair_copula``)
  composed into truncated regular vines (``vine``);
* resamplers: ``CopulaSmoteResampler`` draws synthetic minority rows from
  a vine fitted to the minority class, next to interpolation baselines
  (``SmoteResampler``, ``BorderlineSmoteResampler``, ``AdasynResampler``);
* experiment plumbing: leakage-free preprocessing, a self-contained
  logistic-regression evaluator, the paired 5x2 t-test, and a runner/CLI
  that writes metrics.csv and pairwise.json.
"""

from ._validation import (
    CopulaSmoteError,
    GlobalMissingColumnError,
    InvalidInputError,
    InvalidSpecError,
    MissingResultError,
    NumericFailureError,
    UnattainableTauError,
)
from .datasets import BUILTIN_SPECS, DatasetSpec, DatasetTable, builtin_spec, load_dataset
from .evaluation import METRIC_NAMES, LogisticRegression, MetricReport, compute_metrics
from .pair_copula import (
    DEFAULT_FAMILY_LIBRARY,
    CopulaFamily,
    PairCopulaSpec,
    copula_cdf,
    empirical_kendall_tau,
    fit_pair_copula,
    h_function,
    inverse_h_function,
    log_density,
    parameter_to_tau,
    tau_to_parameter,
    transpose_spec,
)
from .preprocess import (
    SplitPlan,
    TrainStandardScaler,
    ZeroMedianImputer,
    make_5x2_splits,
    stratified_subsample,
)
from .resampling import (
    METHOD_NAMES,
    AdasynResampler,
    BorderlineSmoteResampler,
    CopulaSmoteResampler,
    NoResampler,
    ResampleOutput,
    SmoteResampler,
    canonical_method_name,
    empirical_inverse_cdf,
    make_resampler,
    pseudo_observations,
)
from .runner import ExperimentConfig, ResultStore, fold_seed, pairwise_tests, run_experiment
from .stats_test import TestResult, dietterich_5x2, student_t_sf
from .vine import VineCopula, VineEdge, default_truncation

__version__ = "0.1.0"

__all__ = [
    "AdasynResampler",
    "BorderlineSmoteResampler",
    "BUILTIN_SPECS",
    "CopulaFamily",
    "CopulaSmoteError",
    "CopulaSmoteResampler",
    "DatasetSpec",
    "DatasetTable",
    "DEFAULT_FAMILY_LIBRARY",
    "ExperimentConfig",
    "GlobalMissingColumnError",
    "InvalidInputError",
    "InvalidSpecError",
    "LogisticRegression",
    "METHOD_NAMES",
    "METRIC_NAMES",
    "MetricReport",
    "MissingResultError",
    "NoResampler",
    "NumericFailureError",
    "PairCopulaSpec",
    "ResampleOutput",
    "ResultStore",
    "SmoteResampler",
    "SplitPlan",
    "TestResult",
    "TrainStandardScaler",
    "UnattainableTauError",
    "VineCopula",
    "VineEdge",
    "ZeroMedianImputer",
    "builtin_spec",
    "canonical_method_name",
    "compute_metrics",
    "copula_cdf",
    "default_truncation",
    "dietterich_5x2",
    "empirical_inverse_cdf",
    "empirical_kendall_tau",
    "fit_pair_copula",
    "fold_seed",
    "h_function",
    "inverse_h_function",
    "load_dataset",
    "log_density",
    "make_5x2_splits",
    "make_resampler",
    "pairwise_tests",
    "parameter_to_tau",
    "pseudo_observations",
    "run_experiment",
    "stratified_subsample",
    "student_t_sf",
    "tau_to_parameter",
    "transpose_spec",
    "__version__",
]
