"""
Theoretical Haar wavelet variance of a noise model.

Three evaluation routes are provided:

* :class:`FilterMatrixOracle` and :func:`theoretical_wv_trace` build the
  filter matrices A_j and the covariance explicitly and return tr[A_j Sigma].
  They are quadratic in memory and exist for validation.
* :func:`theoretical_wv_fast` reduces the trace to a weighted sum of lag
  averages a_k with weights taken from the filter autocorrelation. This is
  exact for Toeplitz covariances and a large-sample surrogate otherwise.
* :func:`nonstationary_partial_sums` is the exact route for the flicker
  component, working on running sums of its covariance diagonals.

:class:`ResidualCorrection` accounts for the projection of the noise onto
the complement of the design when the WV is computed on regression
residuals, and :class:`WvEvaluator` bundles everything the optimizer needs
for repeated evaluations.
"""

import functools
import logging

import numpy as np
from scipy import linalg
from scipy.signal import fftconvolve

from . import missingness as mm
from . import noise
from .errors import InsufficientLags, OracleSizeExceeded, RankDeficientDesign
from .wavelet import coefficient_count, haar_filter

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 4096


class FilterMatrixOracle(object):
    """Explicit filter matrix of one scale.

    Row i of ``rows`` is the Haar filter shifted to start at position i, so
    A_j = rows^T rows / M_j.

    :param j: Scale
    :param n: Series length"""
    def __init__(self, j, n, cap=DEFAULT_ORACLE_CAP):
        if n > cap:
            raise OracleSizeExceeded('Oracle limited to n <= {0}, got {1}'.format(cap, n))
        taps = haar_filter(j).taps
        if len(taps) > n:
            raise InsufficientLags('Scale {0} does not fit {1} values'.format(j, n))
        self.j = j
        self.n = n
        self.m = coefficient_count(n, j)
        first_col = np.zeros(self.m)
        first_col[0] = taps[0]
        first_row = np.zeros(n)
        first_row[:len(taps)] = taps
        self.rows = linalg.toeplitz(first_col, first_row)

    @property
    def matrix(self):
        return self.rows.T @ self.rows / self.m

    def wv(self, sigma):
        """tr[A_j Sigma]"""
        return float(np.sum((self.rows @ sigma) * self.rows) / self.m)

    def cov(self, other, sigma):
        """2 tr[A_j Sigma A_l Sigma], the Gaussian covariance of two WV estimates."""
        left = self.rows @ sigma @ other.rows.T
        return float(2.0 * np.sum(left * left) / (self.m * other.m))


def modulated_covariance(model, n, m=None):
    """Dense Sigma, or Sigma * (Lambda + mu^2 11^T) when a chain is given."""
    sigma = noise.covariance_matrix(model, n)
    if m is not None:
        sigma = sigma * linalg.toeplitz(mm.modulation(m, n))
    return sigma


def wv_from_matrix(sigma, J, cap=DEFAULT_ORACLE_CAP):
    """Trace-form WV of an explicit covariance matrix at scales 1..J."""
    n = sigma.shape[0]
    return np.array([FilterMatrixOracle(j, n, cap).wv(sigma) for j in range(1, J + 1)])


def theoretical_wv_trace(model, n, J, m=None, cap=DEFAULT_ORACLE_CAP):
    """Theoretical WV tr[A_j Sigma] from explicit matrices.

    :param m: Optional :class:`.missingness.MissingnessModel`; the covariance
        is then modulated by Lambda + mu^2 11^T
    :raises OracleSizeExceeded: if n exceeds ``cap``"""
    if n > cap:
        raise OracleSizeExceeded('Oracle limited to n <= {0}, got {1}'.format(cap, n))
    if 2 ** J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, 2 ** J))
    return wv_from_matrix(modulated_covariance(model, n, m), J, cap)


@functools.lru_cache(maxsize=32)
def fast_weights(j):
    """Weights w_{j,k}, k = 0..L_j-1, with nu_j = sum_k w_{j,k} a_k."""
    r = haar_filter(j).autocorrelation()
    length = 2 ** j
    w = 2.0 * r[length - 1:]
    w[0] = r[length - 1]
    w.setflags(write=False)
    return w


def fast_wv(seq, J):
    """nu_j = sum_k w_{j,k} seq_k for j = 1..J."""
    if len(seq) < 2 ** J:
        raise InsufficientLags('Need {0} lags, got {1}'.format(2 ** J, len(seq)))
    return np.array([fast_weights(j) @ seq[:2 ** j] for j in range(1, J + 1)])


def theoretical_wv_fast(summary, n, J):
    """Theoretical WV from a lag summary (autocovariance or diagonal averages)."""
    if 2 ** J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, 2 ** J))
    return fast_wv(summary.seq, J)


def missingness_adjusted_wv(summary, m, n, J):
    """WV of Sigma * (Lambda + mu^2 11^T), applied lag by lag."""
    seq = summary.seq * mm.modulation(m, len(summary.seq))
    return theoretical_wv_fast(noise.CovarianceSummary(summary.mode, seq), n, J)


def nonstationary_partial_sums(component, n, J, weights=None):
    """Exact Haar WV of a flicker component, optionally modulated.

    Uses Sigma[x, x+k] = s2 C_k(x) with C_k the running sum of h_u h_{u+k},
    so the mean over coefficient positions of each product f_a f_{a+k}
    Sigma[i+a, i+a+k] is a difference of second running sums.

    :param weights: Lag weights (first column of the Toeplitz modulation),
        None for unit weights"""
    L_J = 2 ** J
    if L_J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, L_J))
    mod = np.ones(L_J) if weights is None else np.asarray(weights)[:L_J]
    h = component.kernel(n)
    filters = [haar_filter(j) for j in range(1, J + 1)]
    out = np.zeros(J)
    for k in range(L_J):
        running = np.cumsum(h[:n - k] * h[k:])
        twice = np.concatenate([[0.0], np.cumsum(running)])
        for idx, f in enumerate(filters):
            length = f.length
            if k >= length:
                continue
            m = n - length + 1
            a = np.arange(length - k)
            total = (f.taps[:length - k] * f.taps[k:]) @ (twice[a + m] - twice[a])
            out[idx] += (1.0 if k == 0 else 2.0) * mod[k] * total / m
    return component.sigma2 * out


def model_wv(model, n, J, m=None):
    """Exact theoretical WV of a model, with optional missingness modulation.

    Stationary components go through the lag form; the flicker component
    through :func:`nonstationary_partial_sums`."""
    L_J = 2 ** J
    if L_J > n:
        raise InsufficientLags('{0} scales need at least {1} values'.format(J, L_J))
    mod = np.ones(L_J) if m is None else mm.modulation(m, L_J)
    seq = np.zeros(L_J)
    out = np.zeros(J)
    for c in model.components:
        if c.stationary:
            seq += c.autocovariance(L_J)
        else:
            out += nonstationary_partial_sums(c, n, J, mod)
    return out + fast_wv(seq * mod, J)


def correction_grid(n):
    """Lags at which the residual correction is evaluated exactly.

    1 + 3 floor(log2 n) points (at most n), geometric between 1 and n-1,
    plus lag 0; strictly increasing."""
    if n < 2:
        raise ValueError('n must be at least 2')
    count = min(1 + 3 * int(np.floor(np.log2(n))), n)
    grid = np.concatenate([[0], np.rint(np.geomspace(1, n - 1, count - 1))]).astype(int)
    grid[-1] = n - 1
    for i in range(1, count):
        grid[i] = max(grid[i], grid[i - 1] + 1)
    for i in range(count - 2, 0, -1):
        grid[i] = min(grid[i], grid[i + 1] - 1)
    return grid


def orthonormal_basis(X):
    """Orthonormal basis of the column space of X.

    :raises RankDeficientDesign: if X does not have full column rank"""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError('The design must be a matrix')
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], 0))
    if X.shape[1] > X.shape[0]:
        raise RankDeficientDesign('More regressors than observations')
    q, r = linalg.qr(X, mode='economic')
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        raise RankDeficientDesign('The design does not have full column rank')
    return q


class ResidualCorrection(object):
    """Lag-sum correction for WV computed on least-squares residuals.

    With R = I - P the residual maker of X, the k-th super-diagonal sum of
    R Sigma differs from a_k (n - k) by -sum_s rho(|s - k|) C_k(s), where
    C_k(s) = sum_{i <= n-1-k} <Q_i, Q_{i+s}> for an orthonormal basis Q.
    The C_k are precomputed on :func:`correction_grid` lags and folded into
    a grid-by-lag matrix, so evaluating the correction for a new rho is a
    single matrix-vector product followed by linear interpolation.

    :param X: n x p design"""
    def __init__(self, X):
        q = orthonormal_basis(X)
        n, p = q.shape
        self.n = n
        self.p = p
        self.grid = correction_grid(n)
        self.weights = np.zeros((len(self.grid), n))
        if p == 0:
            return
        for row, lag in enumerate(self.grid):
            head = q[:n - lag]
            # correlation over s = -(n-lag-1)..n-1, summed across columns
            corr = fftconvolve(head[::-1], q, axes=0).sum(axis=1)
            s = np.arange(-(n - lag - 1), n)
            self.weights[row] = np.bincount(np.abs(s - lag), weights=corr, minlength=n)[:n]
        logger.debug('Residual correction on %d grid lags for n=%d, p=%d',
                     len(self.grid), n, p)

    @property
    def projection_dims(self):
        return self.p

    def delta(self, seq, lags=None):
        """Interpolated change of the lag sums, at ``lags`` (default all)."""
        if len(seq) != self.n:
            raise InsufficientLags('Correction needs {0} lags, got {1}'.format(self.n, len(seq)))
        at_grid = -(self.weights @ seq)
        if lags is None:
            lags = np.arange(self.n)
        return np.interp(lags, self.grid, at_grid)

    def per_lag(self, seq, count=None):
        """delta_k / (n - k) for k = 0..count-1."""
        count = self.n if count is None else count
        lags = np.arange(count)
        return self.delta(seq, lags) / (self.n - lags)

    def apply(self, summary, m=None):
        """Corrected and modulated lag averages B**."""
        averages = summary.seq + self.per_lag(summary.seq)
        if m is not None:
            averages = averages * mm.modulation(m, self.n)
        return noise.CovarianceSummary(noise.SummaryMode.NONSTATIONARY, averages)


def residual_corrected_summary(summary, X, m=None):
    """Lag averages of the residual covariance, modulated by the missingness chain."""
    return ResidualCorrection(X).apply(summary, m)


class WvEvaluator(object):
    """Repeated theoretical WV evaluations for one template, chain and length.

    Everything that does not depend on the noise parameters (modulation
    weights, the flicker WV at unit variance, the residual correction) is
    computed once.

    :param template: :class:`.noise.NoiseModel` fixing the structure
    :param n: Series length
    :param J: Number of scales
    :param m: Missingness chain, None for complete data
    :param correction: Optional :class:`ResidualCorrection`"""
    def __init__(self, template, n, J, m=None, correction=None):
        if 2 ** J > n:
            raise InsufficientLags('{0} scales need at least {1} values'.format(J, 2 ** J))
        self.n = n
        self.J = J
        self.m = m
        self.correction = correction
        self.length = 2 ** J
        self.mod = np.ones(n) if m is None else mm.modulation(m, n)
        self._unit_nonstationary = {}
        self._unit_averages = {}
        for idx, c in enumerate(template.components):
            if not c.stationary:
                unit = c.with_vector(np.r_[1.0, c.vector[1:]])
                self._unit_nonstationary[idx] = nonstationary_partial_sums(
                    unit, n, J, self.mod)
                if correction is not None:
                    self._unit_averages[idx] = unit.diagonal_averages(n)

    def __call__(self, model):
        lags = self.n if self.correction is not None else self.length
        seq = np.zeros(lags)
        out = np.zeros(self.J)
        for idx, c in enumerate(model.components):
            if c.stationary:
                seq += c.autocovariance(lags)
            else:
                out += c.sigma2 * self._unit_nonstationary[idx]
        out += fast_wv(seq[:self.length] * self.mod[:self.length], self.J)
        if self.correction is not None:
            for idx, unit in self._unit_averages.items():
                seq = seq + model.components[idx].sigma2 * unit
            shift = self.correction.per_lag(seq, self.length)
            out += fast_wv(shift * self.mod[:self.length], self.J)
        return out
