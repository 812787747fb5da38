"""Seeded random variate generation with deterministic, splittable streams.

Every stochastic routine in the package draws through an ``RngState``.
Identical (seed, stream_id) pairs reproduce identical sequences; distinct
stream ids are statistically independent by construction (PCG64 seeded via
``SeedSequence`` spawn keys), which is what makes sharded Monte Carlo runs
independent of the worker count.
"""

from __future__ import annotations

import numpy as np

from .errors import BadDof, DimensionMismatch
from .linalg import ScatterMatrix, SpdMatrix, cholesky


class RngState:
    """Deterministic random stream identified by (seed, stream_id).

    Parameters
    ----------
    seed : int
        Base seed shared by every stream of one logical run.
    stream_id : int or tuple of int, optional
        Sub-stream selector. ``substream`` derives child streams by
        extending this key, so a fixed (seed, key) always denotes the
        same stream no matter which worker consumes it.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        self.seed = int(seed)
        if isinstance(stream_id, tuple):
            key = tuple(int(k) for k in stream_id)
        else:
            key = (int(stream_id),)
        self.stream_id = key[0] if len(key) == 1 else key
        self._spawn_key = key
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def substream(self, *key: int) -> "RngState":
        """Derive an independent child stream for a shard of work."""
        return RngState(self.seed, self._spawn_key + tuple(int(k) for k in key))

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, stream_id={self.stream_id})"


def draw_std_normal(rng: RngState, size=None):
    """Standard normal variate(s); a scalar float when size is None."""
    out = rng.generator.standard_normal(size)
    return float(out) if size is None else out


def draw_chi_square(rng: RngState, dof, size=None):
    """Chi-square variate(s) with ``dof`` degrees of freedom.

    Raises
    ------
    BadDof
        If any requested dof is below 1.
    """
    d = np.asarray(dof)
    if np.any(d < 1):
        raise BadDof(f"chi-square needs dof >= 1, got {dof}")
    out = rng.generator.chisquare(d, size)
    return float(out) if size is None and d.ndim == 0 else out


def draw_mvn(rng: RngState, mean, cov, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. rows from N_p(mean, cov).

    Rows are generated as mean + L z with z standard normal and L the lower
    Cholesky factor of cov, so the draw sequence is fixed by the stream.
    """
    mu = np.asarray(mean, dtype=float).reshape(-1)
    lower = cov.chol if isinstance(cov, SpdMatrix) else cholesky(cov)
    if mu.shape[0] != lower.shape[0]:
        raise DimensionMismatch(
            f"mean has length {mu.shape[0]}, covariance is {lower.shape[0]}x{lower.shape[0]}"
        )
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    z = rng.generator.standard_normal((count, mu.shape[0]))
    return mu + z @ lower.T


def bartlett_factor(gen: np.random.Generator, dof: int, p: int, size: int) -> np.ndarray:
    """Batch of lower-triangular Bartlett factors A, one per draw.

    A_ii = sqrt(chi2_{dof-i+1}) for row i = 1..p (so the leading pivot has
    ``dof`` degrees of freedom), A_ij ~ N(0,1) strictly below the diagonal,
    zeros above. With scale = L L^T, (L A)(L A)^T is Wishart(dof, scale).
    """
    a = np.zeros((size, p, p))
    if p > 1:
        rows, cols = np.tril_indices(p, -1)
        a[:, rows, cols] = gen.standard_normal((size, rows.size))
    idx = np.arange(p)
    a[:, idx, idx] = np.sqrt(gen.chisquare(dof - idx, size=(size, p)))
    return a


def draw_wishart(rng: RngState, dof: int, scale, size: int | None = None):
    """Wishart draw(s) with ``dof`` degrees of freedom and the given scale.

    Parameters
    ----------
    rng : RngState
    dof : int
        Degrees of freedom; must be >= p for the nonsingular regime.
    scale : SpdMatrix or array_like
        p x p positive definite scale matrix.
    size : int, optional
        When given, returns a (size, p, p) stack of draws instead of a
        single ``ScatterMatrix``.

    Raises
    ------
    BadDof
        If dof < p.
    NotPositiveDefinite
        If the scale matrix fails Cholesky validation.
    """
    lower = scale.chol if isinstance(scale, SpdMatrix) else cholesky(scale)
    p = lower.shape[0]
    if dof < p:
        raise BadDof(f"Wishart needs dof >= dimension, got dof={dof}, p={p}")
    m = 1 if size is None else int(size)
    a = bartlett_factor(rng.generator, dof, p, m)
    f = lower @ a
    w = f @ f.transpose(0, 2, 1)
    w = (w + w.transpose(0, 2, 1)) / 2.0
    if size is None:
        return ScatterMatrix(w[0], dof=dof)
    return w
