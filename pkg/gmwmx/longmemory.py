"""
Monte Carlo law of the least-squares estimator under long-memory noise.

With noise of memory parameter d in (0, 1/2) the normalized estimator
converges to mu^-1 C^-1 int_0^1 G(u) dB_H(u), where B_H is fractional
Brownian motion with H = d + 1/2, G holds the column-normalized regressors
and C = int G G^T. The integral is approximated by a Riemann-Stieltjes
sum on a regular grid.
"""

import functools
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import FactorizationFailure

logger = logging.getLogger(__name__)

PROBABILITIES = (0.025, 0.05, 0.5, 0.95, 0.975)


@functools.lru_cache(maxsize=16)
def fbm_factor(hurst, grid):
    """Lower Cholesky factor of cov(B_H(s), B_H(t)) at s, t = 1/grid..1."""
    u = np.arange(1, grid + 1) / grid
    s, t = np.meshgrid(u, u, indexing='ij')
    two_h = 2.0 * hurst
    cov = 0.5 * (s ** two_h + t ** two_h - np.abs(t - s) ** two_h)
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        raise FactorizationFailure('fBm covariance is not positive definite for H={0}'.format(hurst))


def simulate_fbm(hurst, grid, reps, rng):
    """Paths of fractional Brownian motion at u = 1/grid..1, one per column."""
    return fbm_factor(hurst, grid) @ rng.standard_normal((grid, reps))


def regressor_functions(X, grid):
    """Normalized regressors at the left end of each grid cell, and C.

    G(u) = X[floor(u n)] / sqrt(mean X^2) per column; C is the average of
    G G^T over the rows of X."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    scale = np.sqrt(np.mean(X * X, axis=0))
    if np.any(scale == 0.0):
        raise ValueError('The design has an all-zero column')
    G = X / scale
    C = G.T @ G / n
    rows = np.minimum((np.arange(grid) * n) // grid, n - 1)
    return G[rows], C


@dataclass(frozen=True)
class LongMemoryTable:
    """Simulated limit law, one row per coefficient.

    :var d: Memory parameter
    :var draws: p x reps array of simulated statistics
    :var quantiles: p x 5 array at :data:`PROBABILITIES`"""
    d: float
    draws: np.ndarray
    quantiles: np.ndarray

    @property
    def std(self):
        return self.draws.std(axis=1, ddof=1)

    def studentized(self, level):
        """(low, high) quantiles of draws / sd for a two-sided level, per coefficient."""
        tail = 0.5 * (1.0 - level)
        standardized = self.draws / self.std[:, None]
        low = np.quantile(standardized, tail, axis=1)
        high = np.quantile(standardized, 1.0 - tail, axis=1)
        return low, high


def long_memory_quantiles(X, d, reps, rng_seed, mu=1.0, grid=512):
    """Quantiles of the long-memory limit of the estimator for design X.

    :param X: n x p design
    :param d: Memory parameter in (0, 1/2)
    :param reps: Number of Monte Carlo replicates
    :param mu: Stationary observation probability
    :param grid: Number of cells of the fBm grid"""
    if not 0.0 < d < 0.5:
        raise ValueError('d must lie in (0, 1/2)')
    rng = np.random.default_rng(rng_seed)
    G, C = regressor_functions(X, grid)
    paths = simulate_fbm(d + 0.5, grid, reps, rng)
    increments = np.diff(paths, axis=0, prepend=0.0)
    draws = linalg.solve(C, G.T @ increments, assume_a='pos') / mu
    quantiles = np.quantile(draws, PROBABILITIES, axis=1).T
    logger.debug('Long-memory table for d=%.4g from %d replicates', d, reps)
    return LongMemoryTable(float(d), draws, quantiles)
