"""Coverage-study harness: scenario grid, Monte Carlo coverage, distribution export.

Each replication runs the full release pipeline: draw an original sample from
N(mu, Sigma), fit the normal model, draw one synthetic replicate, summarize
it, and evaluate the observed statistic against thresholds taken from the
simulated null distribution. Coverage is the non-rejection fraction under a
true null, expected near 1 - alpha because the tests are exact.

Replications are sharded into fixed chunks with RNG streams derived from the
scenario identity, so results are bit-identical for any worker count. Null
distributions are keyed by (kind, n, p, part, iterations, seed) and shared
between scenarios with matching keys.
"""

from __future__ import annotations

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadBlockSize, BadProbability, MetadataMismatch
from .linalg import SpdMatrix, partition, solve_spd
from .nulldist import EmpiricalNullDistribution, quantile, simulate_null
from .randgen import RngState, draw_mvn
from .synthesis import fit, sim_synth_data
from .teststats import (
    CoefficientMatrix,
    gv_statistic,
    independence_statistic,
    regression_statistic,
    sphericity_statistic,
    summarize,
)

# Replications per RNG chunk; fixed so coverage runs are scheduling-invariant.
REP_CHUNK = 250

MU = np.array([1.0, 2.0, 3.0, 4.0])

SAMPLE_SIZES = (10, 20, 100, 500)

# (test, sigma label, part) combinations of the built-in study; each runs at
# every sample size in SAMPLE_SIZES.
BUILTIN_CASES = (
    ("gv", "sigma3", None),
    ("gv", "sigma4", None),
    ("sph", "sigma1", None),
    ("sph", "sigma2", None),
    ("ind", "sigma1", 1),
    ("ind", "sigma4", 2),
    ("cano", "sigma3", 2),
    ("cano", "sigma4", 1),
)


def builtin_sigmas() -> dict[str, SpdMatrix]:
    """The four built-in 4x4 covariance scenarios.

    sigma1: identity; sigma2: 5x identity; sigma3: compound symmetry with
    unit variances and 0.5 correlations; sigma4: block diagonal with
    [[1, .5], [.5, 2]] and [[3, .2], [.2, 4]] on the diagonal.
    """
    sigma3 = np.full((4, 4), 0.5)
    np.fill_diagonal(sigma3, 1.0)
    sigma4 = np.array(
        [
            [1.0, 0.5, 0.0, 0.0],
            [0.5, 2.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 0.2],
            [0.0, 0.0, 0.2, 4.0],
        ]
    )
    return {
        "sigma1": SpdMatrix(np.eye(4)),
        "sigma2": SpdMatrix(5.0 * np.eye(4)),
        "sigma3": SpdMatrix(sigma3),
        "sigma4": SpdMatrix(sigma4),
    }


@dataclass(frozen=True)
class ScenarioConfig:
    """One coverage scenario: population, sample size, test, and run sizes.

    ``delta0_rule`` is fixed to "plug-in-truth": the hypothesized coefficient
    matrix of the regression test is computed from the true Sigma blocks, so
    the null hypothesis holds by construction.
    """

    test: str
    sigma: SpdMatrix
    sigma_label: str
    n: int
    mu: np.ndarray
    part: int | None = None
    alpha: float = 0.05
    reps: int = 10000
    mc_iterations: int = 10000
    seed: int = 0
    delta0_rule: str = "plug-in-truth"

    def __post_init__(self):
        p = self.sigma.dim
        if self.test not in ("gv", "sph", "ind", "cano"):
            raise ValueError(f"unknown test {self.test!r}")
        if np.asarray(self.mu).reshape(-1).shape[0] != p:
            raise ValueError(f"mu has wrong length for p={p}")
        if self.n < p + 1:
            raise ValueError(f"need n >= p + 1, got n={self.n}, p={p}")
        if not (0.0 <= self.alpha < 1.0):
            raise BadProbability(f"alpha must be in [0, 1), got {self.alpha}")
        if self.reps < 1 or self.mc_iterations < 1:
            raise ValueError("reps and mc_iterations must be >= 1")
        if self.test in ("ind", "cano"):
            if self.part is None:
                raise BadBlockSize(f"test {self.test!r} requires part")
            hi = p - 1 if self.test == "ind" else p - self.part
            if not (1 <= self.part <= hi):
                raise BadBlockSize(f"part={self.part} invalid for test {self.test!r}, p={p}")
        elif self.part is not None:
            raise ValueError(f"test {self.test!r} does not take part")

    @property
    def p(self) -> int:
        return self.sigma.dim


@dataclass(frozen=True)
class ScenarioResult:
    """Coverage estimate for one scenario."""

    test: str
    sigma_label: str
    part: int | None
    n: int
    reps: int
    coverage: float
    std_error: float
    thresholds: tuple[float, ...]
    runtime: float


def builtin_scenarios(
    reps: int = 10000, mc_iterations: int = 10000, alpha: float = 0.05, seed: int = 0
) -> list[ScenarioConfig]:
    """The 32 built-in scenarios: 8 test/sigma/part cases x 4 sample sizes."""
    sigmas = builtin_sigmas()
    out = []
    for test, label, part in BUILTIN_CASES:
        for n in SAMPLE_SIZES:
            out.append(
                ScenarioConfig(
                    test=test,
                    sigma=sigmas[label],
                    sigma_label=label,
                    n=n,
                    mu=MU,
                    part=part,
                    alpha=alpha,
                    reps=reps,
                    mc_iterations=mc_iterations,
                    seed=seed,
                )
            )
    return out


def true_delta(sigma: SpdMatrix, part: int) -> CoefficientMatrix:
    """Regression-coefficient matrix of the true covariance: Sigma_12 Sigma_22^-1."""
    blocks = partition(sigma.entries, part, part)
    return CoefficientMatrix(solve_spd(blocks.b22, blocks.b21).T)


def _slug_id(text: str) -> int:
    """Stable 32-bit stream discriminator derived from a scenario label."""
    return zlib.crc32(text.encode("utf-8"))


def null_stream(cfg: ScenarioConfig) -> RngState:
    """RNG stream of the scenario's null-distribution simulation.

    Depends only on (seed, test, n, p, part, iterations), so scenarios that
    share a null law reuse identical simulated values.
    """
    slug = f"null:{cfg.test}:{cfg.n}:{cfg.p}:{cfg.part or 0}:{cfg.mc_iterations}"
    return RngState(cfg.seed, (0, _slug_id(slug)))


def _rep_stream(cfg: ScenarioConfig, chunk: int) -> RngState:
    slug = f"reps:{cfg.test}:{cfg.sigma_label}:{cfg.n}:{cfg.part or 0}"
    return RngState(cfg.seed, (1, _slug_id(slug), chunk))


def null_distribution_for(cfg: ScenarioConfig) -> EmpiricalNullDistribution:
    """Simulate the scenario's null distribution on its dedicated stream."""
    return simulate_null(
        cfg.test, cfg.n, cfg.p, cfg.part, cfg.mc_iterations, null_stream(cfg)
    )


def _statistic_fn(cfg: ScenarioConfig):
    """Observed-statistic evaluator with true-parameter hypothesis arguments."""
    if cfg.test == "gv":
        sigma0 = cfg.sigma
        return lambda s: gv_statistic(s, sigma0)
    if cfg.test == "sph":
        return sphericity_statistic
    if cfg.test == "ind":
        part = cfg.part
        return lambda s: independence_statistic(s, part)
    delta0 = true_delta(cfg.sigma, cfg.part)
    return lambda s: regression_statistic(s, cfg.part, delta0)


def _observed_chunk(cfg: ScenarioConfig, chunk_index: int, count: int) -> np.ndarray:
    """Full-pipeline statistic values for one replication chunk."""
    rng = _rep_stream(cfg, chunk_index)
    stat = _statistic_fn(cfg)
    mu = np.asarray(cfg.mu, dtype=float)
    out = np.empty(count)
    for i in range(count):
        x = draw_mvn(rng, mu, cfg.sigma, cfg.n)
        v = sim_synth_data(fit(x), rng)
        out[i] = stat(summarize(v))
    return out


def observed_sample(cfg: ScenarioConfig, workers: int = 1) -> np.ndarray:
    """Observed statistic over cfg.reps independent pipeline replications."""
    chunks = []
    done = 0
    index = 0
    while done < cfg.reps:
        size = min(REP_CHUNK, cfg.reps - done)
        chunks.append((index, size))
        index += 1
        done += size
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_observed_chunk, [cfg] * len(chunks), *zip(*chunks)))
    else:
        parts = [_observed_chunk(cfg, ci, size) for ci, size in chunks]
    return np.concatenate(parts)


def _thresholds(cfg: ScenarioConfig, d: EmpiricalNullDistribution) -> tuple[float, ...]:
    if cfg.test == "gv":
        return (quantile(d, cfg.alpha / 2.0), quantile(d, 1.0 - cfg.alpha / 2.0))
    if cfg.test == "cano":
        return (quantile(d, 1.0 - cfg.alpha),)
    return (quantile(d, cfg.alpha),)


def _non_reject_count(cfg: ScenarioConfig, observed: np.ndarray, thr: tuple[float, ...]) -> int:
    if cfg.test == "gv":
        return int(np.count_nonzero((observed >= thr[0]) & (observed <= thr[1])))
    if cfg.test == "cano":
        return int(np.count_nonzero(observed <= thr[0]))
    return int(np.count_nonzero(observed >= thr[0]))


def run_coverage(
    cfg: ScenarioConfig,
    workers: int = 1,
    null_dist: EmpiricalNullDistribution | None = None,
) -> ScenarioResult:
    """Estimate the non-rejection (coverage) probability of one scenario.

    The null distribution is simulated once (or passed in, e.g. from the
    suite-level cache) and its thresholds reused across all replications.
    """
    start = time.perf_counter()
    if null_dist is None:
        null_dist = null_distribution_for(cfg)
    else:
        expected = (cfg.test, cfg.n, cfg.p, cfg.part, cfg.mc_iterations)
        got = (null_dist.kind, null_dist.nsample, null_dist.pvariates, null_dist.part,
               null_dist.iterations)
        if got != expected:
            raise MetadataMismatch(f"null distribution {got} does not match scenario {expected}")
    thr = _thresholds(cfg, null_dist)
    observed = observed_sample(cfg, workers)
    kept = _non_reject_count(cfg, observed, thr)
    cov = kept / cfg.reps
    return ScenarioResult(
        test=cfg.test,
        sigma_label=cfg.sigma_label,
        part=cfg.part,
        n=cfg.n,
        reps=cfg.reps,
        coverage=cov,
        std_error=float(np.sqrt(cov * (1.0 - cov) / cfg.reps)),
        thresholds=thr,
        runtime=time.perf_counter() - start,
    )


def run_coverage_suite(scenarios: list[ScenarioConfig], workers: int = 1) -> list[ScenarioResult]:
    """Run a list of scenarios, sharing null distributions with equal keys."""
    cache: dict[tuple, EmpiricalNullDistribution] = {}
    results = []
    for cfg in scenarios:
        key = (cfg.test, cfg.n, cfg.p, cfg.part, cfg.mc_iterations, cfg.seed)
        if key not in cache:
            cache[key] = null_distribution_for(cfg)
        results.append(run_coverage(cfg, workers=workers, null_dist=cache[key]))
    return results


def export_distributions(
    cfg: ScenarioConfig, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Paired samples for plotting: observed statistic and simulated null values.

    Returns (observed, null) arrays of lengths cfg.reps and cfg.mc_iterations.
    Under a true null the two samples agree in distribution; the
    Kolmogorov-Smirnov distance between them is the standard check.
    """
    observed = observed_sample(cfg, workers)
    null_dist = null_distribution_for(cfg)
    return observed, np.array(null_dist.values)


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs."""
    x = np.sort(np.asarray(a, dtype=float).reshape(-1))
    y = np.sort(np.asarray(b, dtype=float).reshape(-1))
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / x.size
    cdf_y = np.searchsorted(y, grid, side="right") / y.size
    return float(np.abs(cdf_x - cdf_y).max())
