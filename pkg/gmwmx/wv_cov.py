"""
Covariance matrix V of the empirical wavelet variance.

For Gaussian coefficients cov(W^2, W'^2) = 2 cov(W, W')^2, so V follows
from the covariances of the Haar coefficients within and across scales.
These are built recursively from scale 1, using

    W_{j+1,t} = W_{j,t}/2 + W_{j,t+s} + W_{j,t+2s}/2,   s = 2^(j-1).

Stationary models only need the lag functions of the coefficients; the
non-stationary path propagates full coefficient covariance matrices.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import noise
from .errors import CapExceeded, FactorizationFailure, InsufficientLags, OracleSizeExceeded
from .theo_wv import DEFAULT_ORACLE_CAP, FilterMatrixOracle
from .wavelet import coefficient_count

logger = logging.getLogger(__name__)

DEFAULT_NONSTATIONARY_CAP = 2048


class CovMethod(enum.Enum):
    TRACE_ORACLE = 'trace-oracle'
    RECURSIVE_STATIONARY = 'recursive-stationary'
    RECURSIVE_NONSTATIONARY = 'recursive-nonstationary'
    APPROXIMATE_NONSTATIONARY = 'approximate-nonstationary'


@dataclass(frozen=True)
class WvCovariance:
    """Covariance of the WV estimates.

    :var V: J x J symmetric matrix
    :var method: :class:`CovMethod` that produced it"""
    V: np.ndarray
    method: CovMethod

    @property
    def J(self):
        return self.V.shape[0]

    @property
    def variances(self):
        return np.diag(self.V).copy()

    def inverse(self, ridge=1e-10):
        """(V + ridge tr(V)/J I)^-1, the optimal GMWM weight."""
        shifted = self.V + ridge * np.trace(self.V) / self.J * np.eye(self.J)
        try:
            factor = linalg.cho_factor(shifted)
        except linalg.LinAlgError:
            raise FactorizationFailure('WV covariance is not positive definite')
        omega = linalg.cho_solve(factor, np.eye(self.J))
        return 0.5 * (omega + omega.T)


def wv_cov_trace(model, n, J, cap=DEFAULT_ORACLE_CAP):
    """V from explicit matrices, v_{j,l} = 2 tr[A_j Sigma A_l Sigma]."""
    if n > cap:
        raise OracleSizeExceeded('Oracle limited to n <= {0}, got {1}'.format(cap, n))
    sigma = noise.covariance_matrix(model, n)
    oracles = [FilterMatrixOracle(j, n, cap) for j in range(1, J + 1)]
    V = np.empty((J, J))
    for a in range(J):
        for b in range(a, J):
            V[a, b] = V[b, a] = oracles[a].cov(oracles[b], sigma)
    return WvCovariance(V, CovMethod.TRACE_ORACLE)


def _shift(f, s):
    """g[i] = f[i + s], zero where i + s falls outside."""
    g = np.zeros_like(f)
    if s >= 0:
        g[:len(f) - s] = f[s:]
    else:
        g[-s:] = f[:len(f) + s]
    return g


def _base_scale(rho):
    return 0.5 * rho - 0.25 * _shift(rho, -1) - 0.25 * _shift(rho, 1)


def _next_scale(f, j):
    s = 2 ** (j - 1)
    return (1.5 * f + _shift(f, s) + _shift(f, -s)
            + 0.25 * _shift(f, 2 * s) + 0.25 * _shift(f, -2 * s))


def _cross_next(g, l):
    s = 2 ** (l - 1)
    return 0.5 * g + _shift(g, s) + 0.5 * _shift(g, 2 * s)


class _LagGrid(object):
    """Symmetric lag axis -P..P wide enough to hold every coefficient function."""
    def __init__(self, seq, J, n):
        self.P = n - 1 + 2 ** J
        rho = np.zeros(self.P + 1)
        count = min(len(seq), n)
        rho[:count] = seq[:count]
        self.rho = np.concatenate([rho[:0:-1], rho])

    def at(self, f, lags):
        return f[np.asarray(lags) + self.P]


def coeff_autocov(summary, J, max_lag):
    """Autocovariances f_j(h) of the scale-j coefficients, h = -max_lag..max_lag.

    Lags of the summary beyond its length are taken as zero."""
    if len(summary.seq) < 2:
        raise InsufficientLags('Need at least two lags')
    n = max(len(summary.seq), max_lag + 1)
    grid = _LagGrid(summary.seq, J, n)
    f = _base_scale(grid.rho)
    lags = np.arange(-max_lag, max_lag + 1)
    out = [grid.at(f, lags)]
    for j in range(1, J):
        f = _next_scale(f, j)
        out.append(grid.at(f, lags))
    return out


def _cross_weights(m_j, m_l):
    """Lags h = -(M_j-1)..M_l-1 and the number of (t, t+h) pairs at each."""
    h = np.arange(-(m_j - 1), m_l)
    count = np.minimum(m_j - 1, m_l - 1 - h) - np.maximum(0, -h) + 1
    return h, count


def wv_cov_recursive_stationary(summary, n, J):
    """V for a stationary model from the coefficient lag functions.

    Var(nu_j) = 2/M_j^2 sum_i (M_j - |i|) f_j(i)^2 and the cross terms use
    cov(W_{j,t}, W_{l,t+h}), obtained from f_j by the same recursion applied
    on the coarser side only."""
    if 2 ** J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, 2 ** J))
    grid = _LagGrid(summary.seq, J, n)
    counts = [coefficient_count(n, j) for j in range(1, J + 1)]
    V = np.empty((J, J))
    f = _base_scale(grid.rho)
    for a in range(J):
        if a > 0:
            f = _next_scale(f, a)
        g = f
        for b in range(a, J):
            if b > a:
                g = _cross_next(g, b)
            h, pairs = _cross_weights(counts[a], counts[b])
            values = grid.at(g, h)
            V[a, b] = V[b, a] = 2.0 * np.sum(pairs * values * values) / (counts[a] * counts[b])
    return WvCovariance(V, CovMethod.RECURSIVE_STATIONARY)


def _coefficient_covariance(sigma):
    """cov(W_1) from Sigma, with W_{1,t} = (x_t - x_{t+1}) / 2."""
    return 0.25 * (sigma[:-1, :-1] - sigma[:-1, 1:] - sigma[1:, :-1] + sigma[1:, 1:])


def _coarsen_rows(c, l):
    s = 2 ** (l - 1)
    m = c.shape[0] - 2 * s
    return 0.5 * c[:m] + c[s:s + m] + 0.5 * c[2 * s:2 * s + m]


def _coarsen_cols(c, l):
    s = 2 ** (l - 1)
    m = c.shape[1] - 2 * s
    return 0.5 * c[:, :m] + c[:, s:s + m] + 0.5 * c[:, 2 * s:2 * s + m]


def wv_cov_recursive_nonstationary(model, n, J, cap=DEFAULT_NONSTATIONARY_CAP, exact=None):
    """V for a model with a non-stationary component.

    Up to ``cap`` the coefficient covariance matrices are propagated scale
    by scale from Sigma. Above it the stationary recursion is run on the
    diagonal averages, which treats the coefficients as stationary.

    :param exact: True forces the matrix path, False the approximation,
        None chooses by ``cap``
    :raises CapExceeded: if the matrix path is forced above ``cap``"""
    if 2 ** J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, 2 ** J))
    if exact is None:
        exact = n <= cap
    if exact and n > cap:
        raise CapExceeded('Exact non-stationary V limited to n <= {0}, got {1}'.format(cap, n))
    if not exact:
        logger.info('Using the diagonal-average approximation of V for n=%d', n)
        approx = wv_cov_recursive_stationary(noise.diagonal_averages(model, n), n, J)
        return WvCovariance(approx.V, CovMethod.APPROXIMATE_NONSTATIONARY)
    sigma = noise.covariance_matrix(model, n)
    counts = [coefficient_count(n, j) for j in range(1, J + 1)]
    V = np.empty((J, J))
    within = _coefficient_covariance(sigma)
    for a in range(J):
        if a > 0:
            within = _coarsen_cols(_coarsen_rows(within, a), a)
        cross = within
        for b in range(a, J):
            if b > a:
                cross = _coarsen_cols(cross, b)
            V[a, b] = V[b, a] = 2.0 * np.sum(cross * cross) / (counts[a] * counts[b])
    return WvCovariance(V, CovMethod.RECURSIVE_NONSTATIONARY)


def wv_cov(model, n, J, cap=DEFAULT_NONSTATIONARY_CAP):
    """V by the recursion matching the model's stationarity."""
    if model.stationary:
        return wv_cov_recursive_stationary(noise.autocovariance(model, n), n, J)
    return wv_cov_recursive_nonstationary(model, n, J, cap)
