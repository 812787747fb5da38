"""Observed test statistics computed from a released synthetic dataset.

All four statistics are functions of the synthetic scatter matrix S* (sum of
centered outer products, not divided by n-1):

- generalized variance: (n-1)^p |S*| / |Sigma0|
- sphericity: |S*|^(1/p) / (tr(S*)/p), in (0, 1], equal to 1 iff S* = cI
- independence: |S*| / (|S*_11| |S*_22|), in (0, 1], equal to 1 iff the
  off-diagonal blocks vanish
- regression coefficients: |(D_hat - D0) S*_22 (D_hat - D0)^T| / |S*_11.2|
  with D_hat = S*_12 S*_22^-1 and S*_11.2 the Schur complement; >= 0 and
  0 iff D0 equals the plug-in estimate.

Determinants are combined in log space where the ratios would otherwise
overflow for large n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadBlockSize,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularSample,
    TooFewRows,
)
from .linalg import ScatterMatrix, SpdMatrix, logdet, partition


@dataclass(frozen=True)
class SyntheticSummary:
    """Sufficient summary of a synthetic sample: size, mean vector, scatter matrix."""

    n: int
    mean: np.ndarray
    scatter: ScatterMatrix

    @property
    def p(self) -> int:
        return self.scatter.dim


@dataclass(frozen=True)
class CoefficientMatrix:
    """Hypothesized regression-coefficient matrix, shape (part, p - part)."""

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch(f"coefficient matrix must be 2-d, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def p1(self) -> int:
        return self.values.shape[0]


def summarize(v) -> SyntheticSummary:
    """Compute mean vector and scatter matrix of an n x p synthetic sample.

    Raises
    ------
    TooFewRows
        If n <= p.
    SingularSample
        If the scatter matrix is numerically singular.
    """
    a = np.asarray(v, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected an n x p data matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("data matrix contains non-finite entries")
    n, p = a.shape
    if n < p + 1:
        raise TooFewRows(f"need n >= p + 1, got n={n}, p={p}")
    mean = a.mean(axis=0)
    centered = a - mean
    scatter = ScatterMatrix(centered.T @ centered, dof=n - 1)
    try:
        scatter.chol
    except NotPositiveDefinite as exc:
        raise SingularSample(f"scatter matrix is singular: {exc}") from None
    return SyntheticSummary(n=n, mean=mean, scatter=scatter)


def _as_spd(sigma0) -> SpdMatrix:
    return sigma0 if isinstance(sigma0, SpdMatrix) else SpdMatrix(sigma0)


def gv_statistic(s: SyntheticSummary, sigma0) -> float:
    """Generalized-variance statistic (n-1)^p |S*| / |Sigma0|."""
    ref = _as_spd(sigma0)
    if ref.dim != s.p:
        raise DimensionMismatch(f"sigma0 is {ref.dim}x{ref.dim}, data has p={s.p}")
    log_t = s.p * np.log(s.n - 1) + s.scatter.logdet() - ref.logdet()
    return float(np.exp(log_t))


def sphericity_statistic(s: SyntheticSummary) -> float:
    """Sphericity statistic |S*|^(1/p) / (tr(S*)/p); scale-invariant, in (0, 1]."""
    entries = s.scatter.entries
    diag = np.diag(entries)
    # An exactly scalar matrix is perfectly spherical; the statistic is
    # identically 1 there (and for any p = 1 input), so report it exactly.
    if diag[0] > 0 and np.all(diag == diag[0]) and np.array_equal(entries, np.diag(diag)):
        return 1.0
    tr = float(np.trace(entries))
    return float(np.exp(s.scatter.logdet() / s.p - np.log(tr / s.p)))


def independence_statistic(s: SyntheticSummary, part: int) -> float:
    """Independence statistic |S*| / (|S*_11| |S*_22|) for block split ``part``.

    Evaluated through the Schur identity |S*| = |S*_11| |S*_22 - S*_21 S*_11^-1 S*_12|
    as exp(logdet(Schur) - logdet(S*_22)): when the off-diagonal blocks are
    exactly zero the two log-determinants cancel bitwise and the statistic is
    exactly 1.
    """
    if not (1 <= part <= s.p - 1):
        raise BadBlockSize(f"need 1 <= part <= p - 1, got part={part}, p={s.p}")
    s11, s12, s21, s22 = partition(s.scatter.entries, part, part).blocks()
    schur = s22 - s21 @ np.linalg.solve(s11, s12)
    return float(np.exp(logdet(schur) - logdet(s22)))


def regression_statistic(s: SyntheticSummary, part: int, delta0) -> float:
    """Regression-coefficient statistic for block split ``part`` and hypothesis ``delta0``.

    ``delta0`` is a CoefficientMatrix or array of shape (part, p - part).
    Returns |(D_hat - D0) S*_22 (D_hat - D0)^T| / |S*_11 - S*_12 S*_22^-1 S*_21|.
    """
    p1 = part
    p2 = s.p - part
    if not (1 <= p1 <= p2):
        raise BadBlockSize(f"need 1 <= part <= p - part, got part={part}, p={s.p}")
    d0 = np.asarray(delta0.values if isinstance(delta0, CoefficientMatrix) else delta0, dtype=float)
    if d0.shape != (p1, p2):
        raise DimensionMismatch(f"delta0 must have shape ({p1}, {p2}), got {d0.shape}")
    blocks = partition(s.scatter.entries, p1, p1)
    s11, s12, s21, s22 = blocks.blocks()
    solved = np.linalg.solve(s22, s21)
    d_hat = solved.T
    diff = d_hat - d0
    num = float(np.linalg.det(diff @ s22 @ diff.T))
    den = float(np.linalg.det(s11 - s12 @ solved))
    # Numerator matrix is PSD by construction; clamp roundoff negatives.
    return max(num, 0.0) / den


def plug_in_coefficients(s: SyntheticSummary, part: int) -> CoefficientMatrix:
    """Plug-in estimate S*_12 S*_22^-1 of the regression-coefficient matrix.

    Computed along the same path as ``regression_statistic``, so using it as
    the hypothesized matrix yields an observed statistic of exactly 0.
    """
    p1 = part
    if not (1 <= p1 <= s.p - p1):
        raise BadBlockSize(f"need 1 <= part <= p - part, got part={part}, p={s.p}")
    blocks = partition(s.scatter.entries, p1, p1)
    return CoefficientMatrix(np.linalg.solve(blocks.b22, blocks.b21).T)
