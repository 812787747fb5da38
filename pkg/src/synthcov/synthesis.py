"""Plug-in sampling synthesizer.

Fit a multivariate normal model to confidential data (sample mean, sample
covariance with the n-1 divisor) and release synthetic replicates drawn from
the fitted model. Rows are observations, columns are variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, SingularSample, TooFewRows
from .linalg import SpdMatrix
from .randgen import RngState, draw_mvn


@dataclass(frozen=True)
class FittedNormalModel:
    """Estimated normal model: sample size, mean vector, covariance (n-1 divisor)."""

    n: int
    mean: np.ndarray
    cov: SpdMatrix

    def __post_init__(self):
        if self.n < self.p + 1:
            raise TooFewRows(f"need n >= p + 1, got n={self.n}, p={self.p}")

    @property
    def p(self) -> int:
        return self.cov.dim


def fit(x) -> FittedNormalModel:
    """Estimate (mean, covariance) from an n x p data matrix.

    Requires n >= p + 1 so the covariance estimate is positive definite
    almost surely and all downstream chi-square factors have at least one
    degree of freedom.

    Raises
    ------
    TooFewRows
        If n <= p.
    SingularSample
        If the sample covariance fails Cholesky validation (e.g. a constant
        or exactly collinear column).
    """
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected an n x p data matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("data matrix contains non-finite entries")
    n, p = a.shape
    if n < p + 1:
        raise TooFewRows(f"need n >= p + 1, got n={n}, p={p}")
    mean = a.mean(axis=0)
    centered = a - mean
    scatter = centered.T @ centered
    try:
        cov = SpdMatrix(scatter / (n - 1))
    except NotPositiveDefinite as exc:
        raise SingularSample(f"sample covariance is singular: {exc}") from None
    return FittedNormalModel(n=n, mean=mean, cov=cov)


def sim_synth_data(model: FittedNormalModel, rng: RngState, n_imp: int | None = None) -> np.ndarray:
    """Draw one synthetic dataset of ``n_imp`` rows from the fitted model.

    ``n_imp`` defaults to the original sample size, which is the standard
    release size for singly imputed synthetic data.
    """
    count = model.n if n_imp is None else int(n_imp)
    return draw_mvn(rng, model.mean, model.cov, count)


def sim_multiple(
    model: FittedNormalModel, rng: RngState, m: int, n_imp: int | None = None
) -> list[np.ndarray]:
    """Draw ``m`` mutually independent synthetic replicates."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return [sim_synth_data(model, rng, n_imp) for _ in range(m)]
