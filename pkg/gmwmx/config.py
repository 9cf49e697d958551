"""
Fit options shared by the estimator, the simulation harness and the CLI.
"""

import os
from dataclasses import asdict, dataclass
from typing import Optional


CORRECTIONS = ('none', 'residual')


@dataclass
class FitConfig:
    """Options of a GMWMX fit.

    :var scales: Number of wavelet scales J, None for floor(log2 n) - 1
    :var correction: Residual correction of the theoretical WV, none or residual
    :var ci_level: Two-sided confidence level of reported intervals
    :var n_starts: Number of optimizer starts in the noise fit
    :var max_iter_per_param: Nelder-Mead iteration budget per noise parameter
    :var xtol: Absolute tolerance on the transformed parameters
    :var ftol: Tolerance on the objective, relative to its value at the first start
    :var ridge: Relative ridge added to the WV covariance before inversion
    :var oracle_cap: Largest n for dense trace computations
    :var nonstationary_cap: Largest n for the exact non-stationary WV covariance
    :var long_memory: Use long-memory quantiles for the confidence intervals
    :var long_memory_reps: Monte Carlo replicates of the long-memory statistic
    :var long_memory_grid: Grid size of the fractional Brownian paths
    :var seed: Seed of the optimizer start points and the Monte Carlo draws"""
    scales: Optional[int] = None
    correction: str = 'residual'
    ci_level: float = 0.95
    n_starts: int = 5
    max_iter_per_param: int = 500
    xtol: float = 1e-10
    ftol: float = 1e-12
    ridge: float = 1e-10
    oracle_cap: int = 4096
    nonstationary_cap: int = 2048
    long_memory: bool = False
    long_memory_reps: int = 2000
    long_memory_grid: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.scales is not None and self.scales < 1:
            raise ValueError('scales must be a positive integer')
        if self.correction not in CORRECTIONS:
            raise ValueError('correction must be one of {0}'.format(', '.join(CORRECTIONS)))
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError('ci_level must lie in (0, 1)')
        if self.n_starts < 1:
            raise ValueError('n_starts must be at least 1')
        if self.max_iter_per_param < 1:
            raise ValueError('max_iter_per_param must be at least 1')
        if self.ridge < 0.0:
            raise ValueError('ridge must be non-negative')
        if self.long_memory_reps < 10:
            raise ValueError('long_memory_reps must be at least 10')
        if self.long_memory_grid < 8:
            raise ValueError('long_memory_grid must be at least 8')

    def as_dict(self):
        return asdict(self)


def worker_count(default=1):
    """Number of parallel workers, from the GMWMX_THREADS environment variable."""
    raw = os.environ.get('GMWMX_THREADS')
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError('GMWMX_THREADS must be an integer, got {0!r}'.format(raw))
    if value == 0 or value < -1:
        raise ValueError('GMWMX_THREADS must be positive or -1')
    return value
