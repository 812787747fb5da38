"""Monte Carlo simulators for the four pivotal null distributions.

Each released-data statistic (generalized variance, sphericity, independence,
regression coefficients) is pivotal under its null hypothesis: its law does
not depend on the unknown parameters, only on (n, p) and, for the partitioned
tests, on the block size. These simulators sample that law directly from
chi-square and Wishart building blocks, so observed statistics can be tested
exactly against empirical quantiles.

Iterations are sharded into fixed-size chunks, one derived RNG stream per
chunk, and the merged values are sorted; the result therefore depends only on
(seed, stream, iterations), never on how chunks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadBlockSize, BadDof, BadProbability, EmptyDistribution
from .randgen import RngState, bartlett_factor

# Simulated values per RNG chunk; fixed so results are scheduling-invariant.
SIM_CHUNK = 8192

KINDS = ("gv", "sph", "ind", "cano")
_NEEDS_PART = {"gv": False, "sph": False, "ind": True, "cano": True}


@dataclass(frozen=True)
class EmpiricalNullDistribution:
    """Sorted Monte Carlo sample of a statistic under its null hypothesis.

    ``values`` is ascending; ``part`` is the leading block size and is only
    present for the partitioned kinds ("ind", "cano"). The metadata uniquely
    keys cache entries: using a distribution simulated for different
    (kind, n, p, part) would silently break exactness, so consumers must
    check it (see ``inference`` and the cache loader).
    """

    kind: str
    nsample: int
    pvariates: int
    part: int | None
    iterations: int
    seed: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != self.iterations:
            raise ValueError(
                f"values must be a 1-d array of length iterations={self.iterations}, "
                f"got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def meta(self) -> dict:
        return {
            "kind": self.kind,
            "nsample": self.nsample,
            "pvariates": self.pvariates,
            "part": self.part,
            "iterations": self.iterations,
            "seed": self.seed,
        }


def _check_sim_args(nsample: int, pvariates: int, iterations: int) -> None:
    if pvariates < 1:
        raise ValueError(f"pvariates must be >= 1, got {pvariates}")
    if nsample < pvariates + 1:
        raise BadDof(
            f"need nsample >= pvariates + 1 so every chi-square factor has dof >= 1; "
            f"got nsample={nsample}, pvariates={pvariates}"
        )
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")


def _chunks(total: int):
    """Yield (chunk_index, chunk_size) covering ``total`` in SIM_CHUNK pieces."""
    index = 0
    done = 0
    while done < total:
        size = min(SIM_CHUNK, total - done)
        yield index, size
        index += 1
        done += size


def _chol_logdet_batch(mats: np.ndarray) -> np.ndarray:
    """Log-determinants of a stack of PD matrices via batched Cholesky."""
    lower = np.linalg.cholesky(mats)
    return 2.0 * np.log(np.diagonal(lower, axis1=1, axis2=2)).sum(axis=1)


def gv_dist(
    nsample: int, pvariates: int, iterations: int = 10000, rng: RngState | None = None
) -> EmpiricalNullDistribution:
    """Null law of the generalized-variance statistic.

    Each value is the product of 2p independent chi-square draws, two with
    n-j degrees of freedom for every j = 1..p, accumulated in log space.
    The Monte Carlo mean is therefore prod_j (n-j)^2.
    """
    _check_sim_args(nsample, pvariates, iterations)
    rng = rng if rng is not None else RngState(0)
    dfs = nsample - np.arange(1, pvariates + 1)
    parts = []
    for ci, m in _chunks(iterations):
        gen = rng.substream(ci).generator
        log_a = np.log(gen.chisquare(dfs, size=(m, pvariates))).sum(axis=1)
        log_b = np.log(gen.chisquare(dfs, size=(m, pvariates))).sum(axis=1)
        parts.append(np.exp(log_a + log_b))
    values = np.sort(np.concatenate(parts))
    return EmpiricalNullDistribution("gv", nsample, pvariates, None, iterations, rng.seed, values)


def sph_dist(
    nsample: int, pvariates: int, iterations: int = 10000, rng: RngState | None = None
) -> EmpiricalNullDistribution:
    """Null law of the sphericity statistic.

    Per draw: W1 ~ Wishart(n-1, I/(n-1)) and W2 ~ Wishart(n-1, I)
    independently; the value is |W1 W2|^(1/p) / (tr(W1 W2)/p), which lies in
    (0, 1] by the AM-GM inequality on the (positive) eigenvalues of W1 W2.
    """
    _check_sim_args(nsample, pvariates, iterations)
    rng = rng if rng is not None else RngState(0)
    p = pvariates
    nu = nsample - 1
    if p == 1:
        # Degenerate by algebra: |w|^(1/1) equals tr(w)/1 for every draw.
        values = np.ones(iterations)
        return EmpiricalNullDistribution("sph", nsample, 1, None, iterations, rng.seed, values)
    parts = []
    for ci, m in _chunks(iterations):
        gen = rng.substream(ci).generator
        a1 = bartlett_factor(gen, nu, p, m)
        w1 = (a1 @ a1.transpose(0, 2, 1)) / nu
        a2 = bartlett_factor(gen, nu, p, m)
        w2 = a2 @ a2.transpose(0, 2, 1)
        prod = w1 @ w2
        _, ld = np.linalg.slogdet(prod)
        tr = np.trace(prod, axis1=1, axis2=2)
        parts.append(np.exp(ld / p - np.log(tr / p)))
    values = np.sort(np.concatenate(parts))
    return EmpiricalNullDistribution("sph", nsample, pvariates, None, iterations, rng.seed, values)


def _omega2_batch(gen: np.random.Generator, nsample: int, p: int, m: int) -> np.ndarray:
    """Second-stage Wishart draws: Omega2 | Omega1 ~ Wishart(n-1, Omega1/(n-1)).

    Omega1 ~ Wishart(n-1, I) is drawn fresh per value, mirroring the
    two-stage law of the scatter matrix of a synthetic sample.
    """
    nu = nsample - 1
    a1 = bartlett_factor(gen, nu, p, m)
    omega1 = a1 @ a1.transpose(0, 2, 1)
    scale_chol = np.linalg.cholesky(omega1 / nu)
    a2 = bartlett_factor(gen, nu, p, m)
    f = scale_chol @ a2
    return f @ f.transpose(0, 2, 1)


def ind_dist(
    part: int,
    nsample: int,
    pvariates: int,
    iterations: int = 10000,
    rng: RngState | None = None,
) -> EmpiricalNullDistribution:
    """Null law of the independence statistic for block split ``part``.

    Per draw: sample Omega2 through the two-stage Wishart construction,
    split it at ``part``, and take |Omega2| / (|Omega2_11| |Omega2_22|)
    in log space. Values lie in (0, 1] by the Hadamard-Fischer inequality.
    """
    _check_sim_args(nsample, pvariates, iterations)
    if not (1 <= part <= pvariates - 1):
        raise BadBlockSize(f"need 1 <= part <= p - 1, got part={part}, p={pvariates}")
    rng = rng if rng is not None else RngState(0)
    p, p1 = pvariates, part
    parts = []
    for ci, m in _chunks(iterations):
        gen = rng.substream(ci).generator
        omega2 = _omega2_batch(gen, nsample, p, m)
        ld_full = _chol_logdet_batch(omega2)
        ld11 = _chol_logdet_batch(omega2[:, :p1, :p1])
        ld22 = _chol_logdet_batch(omega2[:, p1:, p1:])
        parts.append(np.exp(ld_full - ld11 - ld22))
    values = np.sort(np.concatenate(parts))
    return EmpiricalNullDistribution("ind", nsample, pvariates, part, iterations, rng.seed, values)


def cano_dist(
    part: int,
    nsample: int,
    pvariates: int,
    iterations: int = 10000,
    rng: RngState | None = None,
) -> EmpiricalNullDistribution:
    """Null law of the regression-coefficient statistic for block split ``part``.

    Per draw: split Omega2 at ``part`` and take
    |O12 O22^-1 O21| / |O11 - O12 O22^-1 O21|,
    the cross-block quadratic form over the Schur complement. Requires
    part <= p - part (the leading block may not exceed the trailing one).
    """
    _check_sim_args(nsample, pvariates, iterations)
    if not (1 <= part <= pvariates - part):
        raise BadBlockSize(
            f"need 1 <= part <= p - part for the regression law, got part={part}, p={pvariates}"
        )
    rng = rng if rng is not None else RngState(0)
    p, p1 = pvariates, part
    parts = []
    for ci, m in _chunks(iterations):
        gen = rng.substream(ci).generator
        omega2 = _omega2_batch(gen, nsample, p, m)
        o11 = omega2[:, :p1, :p1]
        o12 = omega2[:, :p1, p1:]
        o21 = omega2[:, p1:, :p1]
        o22 = omega2[:, p1:, p1:]
        cross = o12 @ np.linalg.solve(o22, o21)
        num = np.linalg.det(cross)
        den = np.linalg.det(o11 - cross)
        # The numerator matrix is PSD; tiny negative determinants are roundoff.
        parts.append(np.maximum(num, 0.0) / den)
    values = np.sort(np.concatenate(parts))
    return EmpiricalNullDistribution("cano", nsample, pvariates, part, iterations, rng.seed, values)


def simulate_null(
    kind: str,
    nsample: int,
    pvariates: int,
    part: int | None = None,
    iterations: int = 10000,
    rng: RngState | None = None,
) -> EmpiricalNullDistribution:
    """Dispatch to the simulator for ``kind`` ("gv", "sph", "ind", "cano")."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if _NEEDS_PART[kind]:
        if part is None:
            raise BadBlockSize(f"kind {kind!r} requires a block size (part)")
        if kind == "ind":
            return ind_dist(part, nsample, pvariates, iterations, rng)
        return cano_dist(part, nsample, pvariates, iterations, rng)
    if part is not None:
        raise ValueError(f"kind {kind!r} does not take a block size, got part={part}")
    if kind == "gv":
        return gv_dist(nsample, pvariates, iterations, rng)
    return sph_dist(nsample, pvariates, iterations, rng)


def quantile(d: EmpiricalNullDistribution, gamma: float) -> float:
    """Order-statistic quantile with linear interpolation.

    With m values and h = (m-1) * gamma, returns
    values[floor(h)] + (h - floor(h)) * (values[floor(h)+1] - values[floor(h)]);
    gamma=0 gives the minimum and gamma=1 the maximum. This rule is pinned so
    cached distributions give identical thresholds everywhere.
    """
    values = d.values
    if values.size == 0:
        raise EmptyDistribution("no simulated values")
    if not (0.0 <= gamma <= 1.0):
        raise BadProbability(f"gamma must be in [0, 1], got {gamma}")
    h = (values.size - 1) * float(gamma)
    lo = int(np.floor(h))
    frac = h - lo
    if lo + 1 >= values.size:
        return float(values[-1])
    return float(values[lo] + frac * (values[lo + 1] - values[lo]))


def mc_p_value(d: EmpiricalNullDistribution, observed: float, tail: str) -> float:
    """Monte Carlo p-value with the +1/+1 finite-sample correction.

    lower tail: (#{v <= observed} + 1) / (N + 1);
    upper tail: (#{v >= observed} + 1) / (N + 1).
    Always in (0, 1], so a finite simulation never reports a zero p-value.
    """
    values = d.values
    if values.size == 0:
        raise EmptyDistribution("no simulated values")
    if tail == "lower":
        count = int(np.searchsorted(values, observed, side="right"))
    elif tail == "upper":
        count = values.size - int(np.searchsorted(values, observed, side="left"))
    else:
        raise ValueError(f"tail must be 'lower' or 'upper', got {tail!r}")
    return (count + 1) / (values.size + 1)
