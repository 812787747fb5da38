"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's own code paths: the
determinant oracle is cofactor expansion, and the pipeline oracle drives the
two-stage synthesis process with plain numpy so the null simulators can be
checked against an implementation that shares nothing with them.
"""

import numpy as np
import pytest


def cofactor_det(a) -> float:
    """Determinant by recursive cofactor expansion along the first row."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += ((-1.0) ** j) * a[0, j] * cofactor_det(minor)
    return total


def sigma3_matrix() -> np.ndarray:
    a = np.full((4, 4), 0.5)
    np.fill_diagonal(a, 1.0)
    return a


def sigma4_matrix() -> np.ndarray:
    return np.array(
        [
            [1.0, 0.5, 0.0, 0.0],
            [0.5, 2.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 0.2],
            [0.0, 0.0, 0.2, 4.0],
        ]
    )


def random_spd(rng: np.random.Generator, p: int) -> np.ndarray:
    """Well-conditioned random SPD matrix A A^T + 0.5 I."""
    a = rng.standard_normal((p, p))
    return a @ a.T + 0.5 * np.eye(p)


def oracle_pipeline_sample(kind: str, n: int, p: int, part, size: int, seed: int) -> np.ndarray:
    """Observed-statistic sample from the raw two-stage data process, plain numpy.

    Draw X ~ N(0, I), synthesize V from the fitted model, and evaluate the
    statistic with the true null parameters (Sigma0 = I, Delta0 = 0). No
    package code is used, so this is an independent route to the same law
    the null simulators sample.
    """
    gen = np.random.default_rng(seed)
    out = np.empty(size)
    for k in range(size):
        x = gen.standard_normal((n, p))
        xbar = x.mean(axis=0)
        dx = x - xbar
        sigma_hat = (dx.T @ dx) / (n - 1)
        v = xbar + gen.standard_normal((n, p)) @ np.linalg.cholesky(sigma_hat).T
        dv = v - v.mean(axis=0)
        sstar = dv.T @ dv
        if kind == "gv":
            out[k] = (n - 1) ** p * np.linalg.det(sstar)
        elif kind == "sph":
            out[k] = np.linalg.det(sstar) ** (1.0 / p) / (np.trace(sstar) / p)
        elif kind == "ind":
            s11 = sstar[:part, :part]
            s22 = sstar[part:, part:]
            out[k] = np.linalg.det(sstar) / (np.linalg.det(s11) * np.linalg.det(s22))
        elif kind == "cano":
            s11 = sstar[:part, :part]
            s12 = sstar[:part, part:]
            s21 = sstar[part:, :part]
            s22 = sstar[part:, part:]
            cross = s12 @ np.linalg.inv(s22) @ s21
            out[k] = np.linalg.det(cross) / np.linalg.det(s11 - cross)
        else:
            raise ValueError(kind)
    return out


def ks_critical_1pct(m: int, n: int) -> float:
    """Asymptotic 1% two-sample Kolmogorov-Smirnov critical value."""
    return 1.628 * np.sqrt((m + n) / (m * n))


@pytest.fixture
def gen():
    return np.random.default_rng(20240817)
