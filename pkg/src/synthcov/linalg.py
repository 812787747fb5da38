"""Dense symmetric/SPD matrix kernel: Cholesky, log-determinants, block partitions.

All determinant arithmetic downstream happens in log space because the test
statistics multiply (n-1)^p into determinants of scatter matrices, which
reaches ~1e10 and beyond for n = 500, p = 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadBlockSize, DimensionMismatch, NotPositiveDefinite

# Symmetry acceptance: max|a - a.T| <= SYM_RTOL * max|a|.
SYM_RTOL = 1e-10
# Pivot acceptance: every Cholesky pivot L_ii^2 must exceed SPD_RTOL * max diagonal.
SPD_RTOL = 1e-12


def _as_square_array(m) -> np.ndarray:
    """Accept SpdMatrix / ScatterMatrix / array-like; return a float ndarray."""
    a = np.asarray(getattr(m, "entries", m), dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _symmetrize(a: np.ndarray) -> np.ndarray:
    """Validate symmetry within SYM_RTOL and return an exactly symmetric copy."""
    if not np.isfinite(a).all():
        raise ValueError("matrix contains non-finite entries")
    scale = float(np.abs(a).max())
    if float(np.abs(a - a.T).max()) > SYM_RTOL * max(scale, 1.0e-300):
        raise NotPositiveDefinite("matrix is not symmetric")
    # (a + a.T) / 2 makes entries[i][j] == entries[j][i] bitwise.
    return (a + a.T) / 2.0


def _cholesky_symmetric(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an already-symmetrized matrix, with pivot check."""
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Cholesky factorization failed") from None
    pivots = np.diag(lower) ** 2
    if float(pivots.min()) <= SPD_RTOL * float(a.diagonal().max()):
        raise NotPositiveDefinite(
            f"Cholesky pivot {pivots.min():.3e} below tolerance; matrix is numerically singular"
        )
    return lower


def cholesky(m) -> np.ndarray:
    """Lower-triangular factor L with m = L L^T.

    Parameters
    ----------
    m : array_like or SpdMatrix or ScatterMatrix
        Square matrix, symmetric within ``SYM_RTOL``.

    Returns
    -------
    L : ndarray
        Lower-triangular Cholesky factor.

    Raises
    ------
    NotPositiveDefinite
        If the matrix is asymmetric beyond tolerance, indefinite, or any
        pivot falls at or below ``SPD_RTOL`` times the largest diagonal entry.
    """
    return _cholesky_symmetric(_symmetrize(_as_square_array(m)))


def logdet(m) -> float:
    """Log-determinant of a positive definite matrix via its Cholesky factor."""
    if isinstance(m, SpdMatrix):
        return m.logdet()
    lower = cholesky(m)
    return 2.0 * float(np.log(np.diag(lower)).sum())


def trace(m) -> float:
    """Sum of diagonal entries of a square matrix."""
    return float(np.trace(_as_square_array(m)))


def solve_spd(a, b) -> np.ndarray:
    """Solve a @ x = b for positive definite a.

    Validates positive definiteness through ``cholesky`` first, then solves
    with the triangular factor so the residual stays within ~1e-9 * max|b|
    on well-conditioned inputs.
    """
    if isinstance(a, SpdMatrix):
        mat, lower = a.entries, a.chol
    else:
        mat = _symmetrize(_as_square_array(a))
        lower = _cholesky_symmetric(mat)
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != mat.shape[0]:
        raise DimensionMismatch(
            f"right-hand side has {rhs.shape[0]} rows, matrix is {mat.shape[0]}x{mat.shape[0]}"
        )
    y = np.linalg.solve(lower, rhs)
    return np.linalg.solve(lower.T, y)


@dataclass(frozen=True)
class BlockPartition:
    """2x2 block split of a matrix at (row_split, col_split).

    Blocks are indexed 11, 12, 21, 22 in row-major order; ``b11`` has shape
    (row_split, col_split). For a symmetric source, b21 == b12.T.
    """

    row_split: int
    col_split: int
    b11: np.ndarray
    b12: np.ndarray
    b21: np.ndarray
    b22: np.ndarray

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.b11, self.b12, self.b21, self.b22

    def reassemble(self) -> np.ndarray:
        """Tile the four blocks back into the original matrix."""
        return np.block([[self.b11, self.b12], [self.b21, self.b22]])


def partition(m, nrows: int, ncols: int) -> BlockPartition:
    """Split a matrix into 2x2 blocks at row ``nrows`` and column ``ncols``.

    Parameters
    ----------
    m : array_like
        Matrix to split (typically square, p x p).
    nrows, ncols : int
        Size of the leading block: 1 <= nrows <= p-1 and likewise for ncols.

    Raises
    ------
    BadBlockSize
        If either split index leaves an empty block.
    """
    a = np.asarray(getattr(m, "entries", m), dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    r, c = a.shape
    if not (1 <= nrows <= r - 1) or not (1 <= ncols <= c - 1):
        raise BadBlockSize(
            f"split ({nrows}, {ncols}) invalid for a {r}x{c} matrix; "
            f"need 1 <= nrows <= {r - 1} and 1 <= ncols <= {c - 1}"
        )
    return BlockPartition(
        nrows,
        ncols,
        a[:nrows, :ncols].copy(),
        a[:nrows, ncols:].copy(),
        a[nrows:, :ncols].copy(),
        a[nrows:, ncols:].copy(),
    )


class SpdMatrix:
    """Symmetric positive definite matrix with a cached lower Cholesky factor.

    Construction symmetrizes the input exactly and fails with
    ``NotPositiveDefinite`` when factorization fails or a pivot is below
    tolerance, so every live instance is guaranteed usable by the samplers
    and determinant code.
    """

    def __init__(self, entries):
        a = _symmetrize(_as_square_array(entries))
        lower = _cholesky_symmetric(a)
        a.setflags(write=False)
        lower.setflags(write=False)
        self.entries = a
        self.chol = lower

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def logdet(self) -> float:
        return 2.0 * float(np.log(np.diag(self.chol)).sum())

    def det(self) -> float:
        return float(np.exp(self.logdet()))

    def __reduce__(self):
        return (SpdMatrix, (np.array(self.entries),))

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim})"


class ScatterMatrix:
    """Symmetric scatter matrix (sum of centered outer products) with its degrees of freedom.

    Positive definite whenever dof >= p for data from a continuous model;
    the Cholesky factor is computed lazily because singular scatter matrices
    are representable but unusable by the statistics.
    """

    def __init__(self, entries, dof: int):
        a = _symmetrize(_as_square_array(entries))
        if int(dof) < 1:
            raise ValueError(f"dof must be >= 1, got {dof}")
        a.setflags(write=False)
        self.entries = a
        self.dof = int(dof)
        self._chol: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def chol(self) -> np.ndarray:
        if self._chol is None:
            lower = _cholesky_symmetric(self.entries)
            lower.setflags(write=False)
            self._chol = lower
        return self._chol

    def logdet(self) -> float:
        return 2.0 * float(np.log(np.diag(self.chol)).sum())

    def __reduce__(self):
        return (ScatterMatrix, (np.array(self.entries), self.dof))

    def __repr__(self) -> str:
        return f"ScatterMatrix(dim={self.dim}, dof={self.dof})"
