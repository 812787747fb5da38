"""Decision layer: confidence interval for the covariance determinant and exact tests.

Rejection directions differ by statistic. Sphericity and independence reject
for small observed values (lower tail); the regression test rejects for large
values (upper tail); the generalized-variance test of |Sigma| = |Sigma0| is
two-sided. Thresholds come from an ``EmpiricalNullDistribution`` whose
metadata must match the data exactly: a distribution simulated for the wrong
(n, p, part) silently destroys exactness, so mismatches are hard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadProbability, MetadataMismatch
from .nulldist import EmpiricalNullDistribution, mc_p_value, quantile
from .teststats import (
    SyntheticSummary,
    gv_statistic,
    independence_statistic,
    regression_statistic,
    sphericity_statistic,
)

GV_TARGET = "generalized variance |Sigma|"


@dataclass(frozen=True)
class TestOutcome:
    """Observed statistic, threshold(s), decision, and Monte Carlo p-value."""

    kind: str
    observed: float
    alpha: float
    thresholds: tuple[float, ...]
    reject: bool
    p_value: float
    dist_meta: dict


@dataclass(frozen=True)
class IntervalEstimate:
    """Confidence interval for the generalized variance |Sigma|."""

    lower: float
    upper: float
    alpha: float
    target: str = GV_TARGET


def _check_alpha(alpha: float) -> float:
    if not (0.0 < alpha < 1.0):
        raise BadProbability(f"alpha must be in (0, 1), got {alpha}")
    return float(alpha)


def _check_meta(
    d: EmpiricalNullDistribution, kind: str, s: SyntheticSummary, part: int | None = None
) -> None:
    if d.kind != kind or d.nsample != s.n or d.pvariates != s.p or d.part != part:
        raise MetadataMismatch(
            f"null distribution is (kind={d.kind}, n={d.nsample}, p={d.pvariates}, "
            f"part={d.part}); need (kind={kind}, n={s.n}, p={s.p}, part={part})"
        )


def gv_confidence_interval(
    s: SyntheticSummary, alpha: float, d: EmpiricalNullDistribution
) -> IntervalEstimate:
    """(1 - alpha) confidence interval for |Sigma|.

    Endpoints are (n-1)^p |S*| divided by the upper and lower alpha/2
    quantiles of the null law of the generalized-variance statistic.
    """
    alpha = _check_alpha(alpha)
    _check_meta(d, "gv", s)
    log_num = s.p * np.log(s.n - 1) + s.scatter.logdet()
    lower = float(np.exp(log_num - np.log(quantile(d, 1.0 - alpha / 2.0))))
    upper = float(np.exp(log_num - np.log(quantile(d, alpha / 2.0))))
    return IntervalEstimate(lower=lower, upper=upper, alpha=alpha)


def gv_test(
    s: SyntheticSummary, sigma0, alpha: float, d: EmpiricalNullDistribution
) -> TestOutcome:
    """Two-sided test of |Sigma| = |Sigma0|.

    Rejects when the observed statistic falls outside
    [q(alpha/2), q(1 - alpha/2)]; dual to ``gv_confidence_interval`` by
    construction from the same quantiles.
    """
    alpha = _check_alpha(alpha)
    _check_meta(d, "gv", s)
    observed = gv_statistic(s, sigma0)
    lo = quantile(d, alpha / 2.0)
    hi = quantile(d, 1.0 - alpha / 2.0)
    reject = observed < lo or observed > hi
    p_two = 2.0 * min(mc_p_value(d, observed, "lower"), mc_p_value(d, observed, "upper"))
    return TestOutcome(
        kind="gv",
        observed=observed,
        alpha=alpha,
        thresholds=(lo, hi),
        reject=bool(reject),
        p_value=min(1.0, p_two),
        dist_meta=d.meta(),
    )


def sphericity_test(
    s: SyntheticSummary, alpha: float, d: EmpiricalNullDistribution
) -> TestOutcome:
    """Test of Sigma = sigma^2 I; rejects when the observed value is below q(alpha)."""
    alpha = _check_alpha(alpha)
    _check_meta(d, "sph", s)
    observed = sphericity_statistic(s)
    thr = quantile(d, alpha)
    return TestOutcome(
        kind="sph",
        observed=observed,
        alpha=alpha,
        thresholds=(thr,),
        reject=bool(observed < thr),
        p_value=mc_p_value(d, observed, "lower"),
        dist_meta=d.meta(),
    )


def independence_test(
    s: SyntheticSummary, part: int, alpha: float, d: EmpiricalNullDistribution
) -> TestOutcome:
    """Test of zero cross-block covariance; rejects below q(alpha)."""
    alpha = _check_alpha(alpha)
    _check_meta(d, "ind", s, part)
    observed = independence_statistic(s, part)
    thr = quantile(d, alpha)
    return TestOutcome(
        kind="ind",
        observed=observed,
        alpha=alpha,
        thresholds=(thr,),
        reject=bool(observed < thr),
        p_value=mc_p_value(d, observed, "lower"),
        dist_meta=d.meta(),
    )


def regression_test(
    s: SyntheticSummary, part: int, delta0, alpha: float, d: EmpiricalNullDistribution
) -> TestOutcome:
    """Test of a hypothesized coefficient matrix; rejects above q(1 - alpha).

    A size-alpha upper-tail test needs the (1 - alpha) quantile as its
    threshold, which is what yields the nominal ~0.95 coverage at alpha=0.05.
    """
    alpha = _check_alpha(alpha)
    _check_meta(d, "cano", s, part)
    observed = regression_statistic(s, part, delta0)
    thr = quantile(d, 1.0 - alpha)
    return TestOutcome(
        kind="cano",
        observed=observed,
        alpha=alpha,
        thresholds=(thr,),
        reject=bool(observed > thr),
        p_value=mc_p_value(d, observed, "upper"),
        dist_meta=d.meta(),
    )
