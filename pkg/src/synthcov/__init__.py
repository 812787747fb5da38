"""Plug-in sampling synthetic data with exact covariance-structure inference.

Generate singly imputed fully synthetic datasets from a fitted multivariate
normal model and test the population covariance structure of the release
(generalized variance, sphericity, independence between variable subsets,
regression of one subset on another) against Monte Carlo null distributions
that are exact for any sample size.
"""

from .errors import (
    BadBlockSize,
    BadDof,
    BadProbability,
    DimensionMismatch,
    EmptyDistribution,
    MetadataMismatch,
    NotPositiveDefinite,
    ParseError,
    SingularSample,
    SynthcovError,
    TooFewRows,
)
from .experiments import (
    ScenarioConfig,
    ScenarioResult,
    builtin_scenarios,
    builtin_sigmas,
    export_distributions,
    ks_statistic,
    run_coverage,
    run_coverage_suite,
    true_delta,
)
from .inference import (
    IntervalEstimate,
    TestOutcome,
    gv_confidence_interval,
    gv_test,
    independence_test,
    regression_test,
    sphericity_test,
)
from .linalg import (
    BlockPartition,
    ScatterMatrix,
    SpdMatrix,
    cholesky,
    logdet,
    partition,
    solve_spd,
    trace,
)
from .nulldist import (
    EmpiricalNullDistribution,
    cano_dist,
    gv_dist,
    ind_dist,
    mc_p_value,
    quantile,
    simulate_null,
    sph_dist,
)
from .randgen import RngState, draw_chi_square, draw_mvn, draw_std_normal, draw_wishart
from .synthesis import FittedNormalModel, fit, sim_multiple, sim_synth_data
from .teststats import (
    CoefficientMatrix,
    SyntheticSummary,
    gv_statistic,
    independence_statistic,
    plug_in_coefficients,
    regression_statistic,
    sphericity_statistic,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "BadBlockSize",
    "BadDof",
    "BadProbability",
    "BlockPartition",
    "CoefficientMatrix",
    "DimensionMismatch",
    "EmpiricalNullDistribution",
    "EmptyDistribution",
    "FittedNormalModel",
    "IntervalEstimate",
    "MetadataMismatch",
    "NotPositiveDefinite",
    "ParseError",
    "RngState",
    "ScatterMatrix",
    "ScenarioConfig",
    "ScenarioResult",
    "SingularSample",
    "SpdMatrix",
    "SyntheticSummary",
    "SynthcovError",
    "TestOutcome",
    "TooFewRows",
    "builtin_scenarios",
    "builtin_sigmas",
    "cano_dist",
    "cholesky",
    "draw_chi_square",
    "draw_mvn",
    "draw_std_normal",
    "draw_wishart",
    "export_distributions",
    "fit",
    "gv_confidence_interval",
    "gv_dist",
    "gv_statistic",
    "gv_test",
    "independence_statistic",
    "independence_test",
    "ind_dist",
    "ks_statistic",
    "logdet",
    "mc_p_value",
    "partition",
    "plug_in_coefficients",
    "quantile",
    "regression_statistic",
    "regression_test",
    "run_coverage",
    "run_coverage_suite",
    "simulate_null",
    "sim_multiple",
    "sim_synth_data",
    "solve_spd",
    "sph_dist",
    "sphericity_statistic",
    "sphericity_test",
    "summarize",
    "trace",
    "true_delta",
]
