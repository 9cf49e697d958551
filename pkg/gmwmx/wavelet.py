"""
Haar filters, wavelet coefficients and the empirical wavelet variance.

The filter at scale j has L_j = 2^j taps, the first half equal to +1/2^j
and the second half to -1/2^j, so the wavelet variance of white noise
with variance s2 is s2 / 2^j.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from .errors import ScaleBudgetExceeded, SeriesTooShort

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HaarFilter:
    """Haar filter at one scale.

    :var j: Scale, starting at 1
    :var taps: The 2^j filter taps"""
    j: int
    taps: np.ndarray

    @property
    def length(self):
        return len(self.taps)

    def autocorrelation(self):
        """sum_l h_l h_{l+m} for m = -(L-1)..L-1."""
        return np.correlate(self.taps, self.taps, mode='full')


def haar_filter(j):
    if j < 1:
        raise ValueError('Scales start at 1')
    length = 2 ** j
    taps = np.full(length, 1.0 / length)
    taps[length // 2:] *= -1.0
    return HaarFilter(j, taps)


def filter_length(j):
    return 2 ** j


def coefficient_count(n, j):
    """M_j = n - L_j + 1, the number of full-overlap coefficients."""
    return n - filter_length(j) + 1


def default_scales(n):
    """Largest admissible scale count, floor(log2 n) - 1."""
    if n < 4:
        raise ScaleBudgetExceeded('A series of length {0} supports no scale'.format(n))
    return int(np.floor(np.log2(n))) - 1


def wavelet_coefficients(x, j):
    """Full-overlap Haar coefficients W_{j,i} = sum_l h_l x_{i+l}.

    Block sums come from one cumulative sum, so each scale is O(n)."""
    x = np.asarray(x, dtype=float)
    length = filter_length(j)
    if len(x) < length:
        raise SeriesTooShort('Scale {0} needs {1} values, got {2}'.format(j, length, len(x)))
    half = length // 2
    c = np.concatenate([[0.0], np.cumsum(x)])
    m = len(x) - length + 1
    first = c[half:half + m] - c[:m]
    second = c[length:length + m] - c[half:half + m]
    return (first - second) / length


@dataclass
class WvSpectrum:
    """Per-scale wavelet variance.

    :var nu_hat: Estimated wavelet variances, one per scale
    :var counts: Coefficient counts M_j
    :var cov: Optional covariance matrix V of ``nu_hat``"""
    nu_hat: np.ndarray
    counts: np.ndarray
    cov: Optional[np.ndarray] = field(default=None)

    @property
    def J(self):
        return len(self.nu_hat)

    @property
    def scales(self):
        return np.arange(1, self.J + 1)

    @property
    def lengths(self):
        return 2 ** self.scales

    @property
    def n(self):
        return int(self.counts[0] + 1)

    def to_frame(self):
        """Table of (scale, L_j, M_j, nu_hat) rows."""
        return pd.DataFrame({
            'scale': self.scales,
            'L': self.lengths,
            'M': self.counts.astype(int),
            'nu_hat': self.nu_hat,
        })


def empirical_wv(x, J):
    """Mean squared Haar coefficient at scales 1..J.

    Gaps are expected as exact zeros in ``x``."""
    x = np.asarray(x, dtype=float)
    if J < 1:
        raise ValueError('J must be at least 1')
    if 2 ** J > len(x):
        raise ScaleBudgetExceeded('{0} scales need at least {1} values, got {2}'.format(
            J, 2 ** J, len(x)))
    nu = np.empty(J)
    counts = np.empty(J)
    for j in range(1, J + 1):
        w = wavelet_coefficients(x, j)
        nu[j - 1] = np.mean(w * w)
        counts[j - 1] = len(w)
    return WvSpectrum(nu, counts)
