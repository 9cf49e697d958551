"""
Latent noise components and their second-order structure.

A :class:`NoiseModel` is an ordered sum of independent components (white
noise, stationary power-law, flicker and Matern). Each component can report
its autocovariance (stationary components), the diagonal averages of its
covariance matrix, a dense covariance matrix for oracle checks, and exact
Gaussian sample paths.
"""

import enum
import functools
import logging
import re
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special
from scipy.signal import fftconvolve

from .errors import (FactorizationFailure, ModelStringError,
                     NonStationaryComponentPresent)
from .params import Bounded, Variance

logger = logging.getLogger(__name__)

MATERN_CUTOFF = 100.0


class SummaryMode(enum.Enum):
    STATIONARY = 'stationary'
    NONSTATIONARY = 'nonstationary'


@dataclass(frozen=True)
class CovarianceSummary:
    """Lag-indexed summary of a covariance matrix.

    :var mode: :class:`SummaryMode` telling how ``seq`` was obtained
    :var seq: For stationary summaries the autocovariance rho(k), otherwise
        the averages d_k of the k-th super-diagonal, k = 0..n-1"""
    mode: SummaryMode
    seq: np.ndarray

    @property
    def n(self):
        return len(self.seq)

    @property
    def stationary(self):
        return self.mode is SummaryMode.STATIONARY

    def __add__(self, other):
        if len(other.seq) != len(self.seq):
            raise ValueError('Summaries of different lengths cannot be added')
        mode = SummaryMode.STATIONARY
        if not (self.stationary and other.stationary):
            mode = SummaryMode.NONSTATIONARY
        return CovarianceSummary(mode, self.seq + other.seq)


def pl_coefficients(alpha, m):
    """Impulse response of the fractional integration filter.

    h_0 = 1 and h_i = (alpha/2 + i - 1) h_{i-1} / i.

    :param alpha: Spectral index
    :param m: Number of coefficients"""
    if m < 1:
        raise ValueError('At least one coefficient is required')
    i = np.arange(1, m, dtype=float)
    h = np.empty(m)
    h[0] = 1.0
    h[1:] = np.cumprod((alpha / 2.0 + i - 1.0) / i)
    return h


def _lagged_products(h, weights=None):
    """Sums over m of w_m h_m h_{m+k} for k = 0..len(h)-1, via FFT correlation."""
    n = len(h)
    left = h if weights is None else weights * h
    return fftconvolve(left[::-1], h)[n - 1:]


class NoiseComponent(object):
    """Base class of a latent noise component.

    Parameters live in the ``values`` dictionary and are reached through the
    descriptors each subclass declares. ``param_names`` fixes their order in
    the concatenated parameter vector."""
    kind = None
    param_names = ()
    stationary = True

    def __init__(self, *params):
        self.values = {}
        if len(params) != len(self.param_names):
            raise ModelStringError('{0} takes {1} parameter(s), got {2}'.format(
                self.kind, len(self.param_names), len(params)))
        for name, value in zip(self.param_names, params):
            setattr(self, name, value)

    @property
    def vector(self):
        return np.array([getattr(self, name) for name in self.param_names])

    def with_vector(self, vector):
        """Returns a copy of this component carrying new parameter values."""
        return type(self)(*[float(v) for v in vector])

    def descriptor(self, name):
        return type(self).__dict__.get(name) or getattr(type(self), name)

    def search_bounds(self, name):
        """Interval (low, high) the optimizer explores for a parameter.

        None marks an unbounded end; variances are searched on the log scale."""
        desc = self.descriptor(name)
        if isinstance(desc, Variance):
            return (0.0, None)
        return (desc.low, desc.high)

    def autocovariance(self, n):
        raise NonStationaryComponentPresent(
            '{0} has no autocovariance function'.format(self.kind))

    def diagonal_averages(self, n):
        """Averages of the super-diagonals of the covariance matrix."""
        return self.autocovariance(n)

    def covariance_matrix(self, n):
        return linalg.toeplitz(self.autocovariance(n))

    def simulate(self, n, rng):
        raise NotImplementedError

    def __str__(self):
        return '{0}({1})'.format(self.kind, ','.join(
            repr(float(getattr(self, name))) for name in self.param_names))

    def __repr__(self):
        return '<{0} {1}>'.format(type(self).__name__, self)

    def __eq__(self, other):
        return type(self) is type(other) and self.values == other.values

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.values.items()))))


class WhiteNoise(NoiseComponent):
    """Uncorrelated noise.

    :var sigma2: :class:`.params.Variance` Variance"""
    kind = 'wn'
    param_names = ('sigma2',)
    sigma2 = Variance('sigma2')

    def autocovariance(self, n):
        seq = np.zeros(n)
        seq[0] = self.sigma2
        return seq

    def covariance_matrix(self, n):
        return self.sigma2 * np.eye(n)

    def simulate(self, n, rng):
        return np.sqrt(self.sigma2) * rng.standard_normal(n)


class PowerLaw(NoiseComponent):
    """Stationary power-law noise, a fractionally integrated white noise.

    :var sigma2: :class:`.params.Variance` Innovation variance
    :var alpha: :class:`.params.Bounded` Spectral index, below 1"""
    kind = 'pl'
    param_names = ('sigma2', 'alpha')
    sigma2 = Variance('sigma2')
    alpha = Bounded('alpha', -1.0, 1.0)

    def search_bounds(self, name):
        if name == 'alpha':
            return (0.0, 1.0)
        return super(PowerLaw, self).search_bounds(name)

    def autocovariance(self, n):
        a = self.alpha
        k = np.arange(1, n, dtype=float)
        rho0 = self.sigma2 * np.exp(special.gammaln(1.0 - a)
                                    - 2.0 * special.gammaln(1.0 - a / 2.0))
        seq = np.empty(n)
        seq[0] = rho0
        seq[1:] = rho0 * np.cumprod((a / 2.0 + k - 1.0) / (k - a / 2.0))
        return seq

    def simulate(self, n, rng):
        return _stationary_path(self.autocovariance(n), rng)


class Flicker(NoiseComponent):
    """Power-law noise at the non-stationary boundary alpha = 1.

    The process starts from rest, e_k = sum_{i<=k} h_i w_{k-i}, so its
    covariance is sigma2 * U^T U with U upper triangular Toeplitz in h.

    :var sigma2: :class:`.params.Variance` Innovation variance"""
    kind = 'fl'
    param_names = ('sigma2',)
    stationary = False
    sigma2 = Variance('sigma2')
    alpha = 1.0

    def kernel(self, n):
        return pl_coefficients(self.alpha, n)

    def diagonal_averages(self, n):
        h = self.kernel(n)
        k = np.arange(n, dtype=float)
        plain = _lagged_products(h)
        weighted = _lagged_products(h, np.arange(n, dtype=float))
        # sum_m (n - k - m) h_m h_{m+k}
        return self.sigma2 * ((n - k) * plain - weighted) / (n - k)

    def diagonal(self, n, lag):
        """Entries Sigma[x, x+lag], x = 0..n-1-lag, as running sums."""
        h = self.kernel(n)
        return self.sigma2 * np.cumsum(h[:n - lag] * h[lag:])

    def covariance_matrix(self, n):
        sigma = np.zeros((n, n))
        for lag in range(n):
            d = self.diagonal(n, lag)
            idx = np.arange(n - lag)
            sigma[idx, idx + lag] = d
            sigma[idx + lag, idx] = d
        return sigma

    def simulate(self, n, rng):
        w = np.sqrt(self.sigma2) * rng.standard_normal(n)
        return fftconvolve(self.kernel(n), w)[:n]


class Matern(NoiseComponent):
    """Stationary Matern process.

    cov(k) = sigma2 2^(1-nu)/Gamma(nu) (lambda k)^nu K_nu(lambda k), with
    nu = alpha - 1/2.

    :var sigma2: :class:`.params.Variance` Variance
    :var lam: :class:`.params.Bounded` Inverse range, per epoch
    :var alpha: :class:`.params.Bounded` Smoothness, above 1/2"""
    kind = 'matern'
    param_names = ('sigma2', 'lam', 'alpha')
    sigma2 = Variance('sigma2')
    lam = Bounded('lambda', 0.0, None, units='1/epoch')
    alpha = Bounded('alpha', 0.5, None)

    def autocovariance(self, n):
        nu = self.alpha - 0.5
        seq = np.zeros(n)
        seq[0] = self.sigma2
        # beyond lambda k = 100 the correlation is below 1e-40
        count = int(min(n - 1, np.floor(MATERN_CUTOFF / self.lam)))
        x = self.lam * np.arange(1, count + 1, dtype=float)
        with np.errstate(under='ignore', over='ignore', invalid='ignore'):
            log_scale = (1.0 - nu) * np.log(2.0) - special.gammaln(nu)
            tail = np.exp(log_scale + nu * np.log(x)) * special.kv(nu, x)
        seq[1:count + 1] = self.sigma2 * np.nan_to_num(tail, nan=0.0, posinf=0.0)
        return seq

    def simulate(self, n, rng):
        if self.sigma2 == 0.0:
            return np.zeros(n)
        factor = _toeplitz_factor(tuple(self.autocovariance(n)))
        return factor @ rng.standard_normal(n)


@functools.lru_cache(maxsize=8)
def _toeplitz_factor(acov):
    """Lower Cholesky factor of the Toeplitz matrix built from ``acov``."""
    try:
        return linalg.cholesky(linalg.toeplitz(np.asarray(acov)), lower=True)
    except linalg.LinAlgError:
        raise FactorizationFailure(
            'Covariance matrix is not positive definite; check the parameters')


@functools.lru_cache(maxsize=8)
def _circulant_spectrum(acov):
    """Eigenvalues of the minimal circulant embedding of a Toeplitz matrix."""
    acov = np.asarray(acov)
    row = np.concatenate([acov, acov[-2:0:-1]])
    return np.fft.fft(row).real


def _stationary_path(acov, rng):
    """Exact stationary Gaussian path by circulant embedding.

    Falls back to a Cholesky factor when the embedding is not
    non-negative definite."""
    n = len(acov)
    if acov[0] == 0.0:
        return np.zeros(n)
    if n < 3:
        return _toeplitz_factor(tuple(acov)) @ rng.standard_normal(n)
    lam = _circulant_spectrum(tuple(acov))
    if lam.min() < -1e-10 * lam.max():
        logger.debug('Circulant embedding not PSD; using Cholesky factor')
        return _toeplitz_factor(tuple(acov)) @ rng.standard_normal(n)
    m = len(lam)
    lam = np.clip(lam, 0.0, None)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    path = np.fft.fft(np.sqrt(lam / m) * z)
    return path.real[:n]


COMPONENT_TYPES = {cls.kind: cls for cls in (WhiteNoise, PowerLaw, Flicker, Matern)}

DEFAULT_VALUES = {
    'wn': (1.0,),
    'pl': (1.0, 0.5),
    'fl': (1.0,),
    'matern': (1.0, 0.1, 1.0),
}

_TERM = re.compile(r'^\s*(wn|pl|fl|matern)\s*(?:\(([^()]*)\))?\s*$', re.IGNORECASE)


class NoiseModel(object):
    """Ordered sum of independent noise components.

    The concatenated parameter vector gamma follows component order.

    :param components: Iterable of :class:`NoiseComponent`"""
    def __init__(self, components):
        self.components = list(components)
        if sum(not c.stationary for c in self.components) > 1:
            raise ModelStringError('At most one non-stationary component is supported')

    @classmethod
    def parse(cls, text):
        """Builds a model from a string such as ``wn(10)+pl(6,0.9)``.

        Components without values get neutral starting values."""
        if not text or not text.strip():
            raise ModelStringError('Empty noise model string')
        components = []
        for term in text.split('+'):
            match = _TERM.match(term)
            if match is None:
                raise ModelStringError('Unknown noise component: {0!r}'.format(term.strip()))
            kind = match.group(1).lower()
            if match.group(2) is None:
                values = DEFAULT_VALUES[kind]
            else:
                try:
                    values = [float(v) for v in match.group(2).split(',')]
                except ValueError:
                    raise ModelStringError('Bad parameter list in {0!r}'.format(term.strip()))
            try:
                components.append(COMPONENT_TYPES[kind](*values))
            except (TypeError, ValueError) as e:
                raise ModelStringError('{0}: {1}'.format(term.strip(), e))
        return cls(components)

    @property
    def q(self):
        return sum(len(c.param_names) for c in self.components)

    @property
    def vector(self):
        if not self.components:
            return np.zeros(0)
        return np.concatenate([c.vector for c in self.components])

    @property
    def parameter_names(self):
        return ['{0}.{1}'.format(c.kind, p) for c in self.components for p in c.param_names]

    @property
    def stationary(self):
        return all(c.stationary for c in self.components)

    def with_vector(self, gamma):
        """Returns a model of the same structure with parameters ``gamma``."""
        gamma = np.asarray(gamma, dtype=float)
        if len(gamma) != self.q:
            raise ValueError('Expected {0} parameters, got {1}'.format(self.q, len(gamma)))
        out, start = [], 0
        for c in self.components:
            stop = start + len(c.param_names)
            out.append(c.with_vector(gamma[start:stop]))
            start = stop
        return NoiseModel(out)

    def search_bounds(self):
        return [c.search_bounds(p) for c in self.components for p in c.param_names]

    @property
    def variance_mask(self):
        """Boolean flag per entry of gamma, set for variances."""
        return np.array([isinstance(c.descriptor(p), Variance)
                         for c in self.components for p in c.param_names], dtype=bool)

    def __str__(self):
        return '+'.join(str(c) for c in self.components)

    def __repr__(self):
        return '<NoiseModel {0}>'.format(self)

    def __eq__(self, other):
        return isinstance(other, NoiseModel) and self.components == other.components

    def __hash__(self):
        return hash(tuple(self.components))


def autocovariance(model, n):
    """Autocovariance of a stationary model, summed over components.

    :raises NonStationaryComponentPresent: if any component is non-stationary"""
    if n < 2:
        raise ValueError('n must be at least 2')
    seq = np.zeros(n)
    for c in model.components:
        seq += c.autocovariance(n)
    return CovarianceSummary(SummaryMode.STATIONARY, seq)


def diagonal_averages(model, n):
    """Super-diagonal averages of the model covariance, summed over components."""
    if n < 2:
        raise ValueError('n must be at least 2')
    seq = np.zeros(n)
    for c in model.components:
        seq += c.diagonal_averages(n)
    return CovarianceSummary(SummaryMode.NONSTATIONARY, seq)


def summarize(model, n):
    """Autocovariance when the model is stationary, diagonal averages otherwise."""
    if model.stationary:
        return autocovariance(model, n)
    return diagonal_averages(model, n)


def covariance_matrix(model, n):
    """Dense n x n covariance matrix of the model; meant for small n."""
    sigma = np.zeros((n, n))
    for c in model.components:
        sigma += c.covariance_matrix(n)
    return sigma


def simulate(model, n, rng_seed):
    """One Gaussian sample path of the summed components.

    :param rng_seed: Seed, or a :class:`numpy.random.Generator` to draw from"""
    if n < 1:
        raise ValueError('n must be at least 1')
    rng = np.random.default_rng(rng_seed)
    path = np.zeros(n)
    for c in model.components:
        path += c.simulate(n, rng)
    return path
