"""
Two-state Markov chain for the observation indicator Z.

State 1 means observed, state 0 missing. ``p1`` is the probability of
moving from observed to missing and ``p2`` from missing to observed.
"""

import logging

import numpy as np

from .errors import AllMissing, DegenerateChain, UnknownSetting
from .params import Probability, Registry

logger = logging.getLogger(__name__)

CLAMP = 1e-6


class MissingnessModel(object):
    """Transition probabilities of the observation chain.

    :var p1: :class:`.params.Probability` Observed to missing, in [0, 1)
    :var p2: :class:`.params.Probability` Missing to observed, in (0, 1]"""
    p1 = Probability('p1', closed=(True, False))
    p2 = Probability('p2', closed=(False, True))

    def __init__(self, p1, p2):
        self.values = {}
        self.p1 = p1
        self.p2 = p2

    @property
    def mu(self):
        return stationary_mean(self)

    @property
    def rho(self):
        return reparametrize(self)[1]

    @property
    def observed_always(self):
        return self.p1 == 0.0

    def __repr__(self):
        return 'MissingnessModel(p1={0!r}, p2={1!r})'.format(self.p1, self.p2)

    def __eq__(self, other):
        return isinstance(other, MissingnessModel) and self.values == other.values

    def __hash__(self):
        return hash((self.p1, self.p2))


NO_MISSING = MissingnessModel(0.0, 1.0)


def stationary_mean(m):
    """Long-run probability of an observation, p2 / (p1 + p2)."""
    if m.p1 == 0.0 and m.p2 == 0.0:
        raise DegenerateChain('p1 and p2 are both zero')
    if m.p1 == 0.0:
        return 1.0
    return m.p2 / (m.p1 + m.p2)


def lag_autocovariance(m, n):
    """Lag-k autocovariances mu (1 - mu) (1 - p1 - p2)^k, k = 0..n-1."""
    mu = stationary_mean(m)
    decay = 1.0 - m.p1 - m.p2
    k = np.arange(n, dtype=float)
    with np.errstate(under='ignore'):
        return mu * (1.0 - mu) * np.power(decay, k)


def modulation(m, n):
    """First column of Lambda + mu^2 11^T, the Toeplitz weight on Sigma."""
    mu = stationary_mean(m)
    return lag_autocovariance(m, n) + mu * mu


def reparametrize(m):
    """Returns (mu, rho), the stationary mean and the same-state probability.

    rho = (1 - p1) mu + (1 - p2) (1 - mu)."""
    mu = stationary_mean(m)
    rho = (1.0 - m.p1) * mu + (1.0 - m.p2) * (1.0 - mu)
    return mu, rho


def from_moments(mu, rho):
    """Inverse of :func:`reparametrize`.

    :param mu: Stationary mean, in (0, 1]
    :param rho: Same-state probability, in [0, 1)"""
    if not 0.0 < mu <= 1.0:
        raise ValueError('mu must lie in (0, 1]')
    if mu == 1.0:
        return MissingnessModel(0.0, 1.0)
    if not 0.0 <= rho < 1.0:
        raise ValueError('rho must lie in [0, 1)')
    return MissingnessModel((1.0 - rho) / (2.0 * mu), (1.0 - rho) / (2.0 * (1.0 - mu)))


def estimate(z):
    """Transition-frequency estimate of the chain from an observation mask.

    Estimates are clamped to [1e-6, 1 - 1e-6]; a state with no counted
    departures gets the lower bound. A mask without gaps yields the
    no-missingness chain (0, 1)."""
    z = np.asarray(z).astype(bool)
    if len(z) < 2:
        raise ValueError('At least two indicators are required')
    if not z.any():
        raise AllMissing('The observation mask has no observed entry')
    if z.all():
        return MissingnessModel(0.0, 1.0)
    head, tail = z[:-1], z[1:]
    from_observed = head.sum()
    from_missing = (~head).sum()
    p1 = (head & ~tail).sum() / from_observed if from_observed else 0.0
    p2 = (~head & tail).sum() / from_missing if from_missing else 0.0
    p1 = float(np.clip(p1, CLAMP, 1.0 - CLAMP))
    p2 = float(np.clip(p2, CLAMP, 1.0 - CLAMP))
    logger.debug('Estimated missingness chain p1=%.6g p2=%.6g', p1, p2)
    return MissingnessModel(p1, p2)


def simulate(m, n, rng_seed):
    """Observation mask of length n started from the stationary law.

    :param rng_seed: Seed, or a :class:`numpy.random.Generator` to draw from"""
    rng = np.random.default_rng(rng_seed)
    mu = stationary_mean(m)
    u = rng.random(n)
    z = np.empty(n, dtype=np.int8)
    state = u[0] < mu
    z[0] = state
    stay_observed, leave_missing = 1.0 - m.p1, m.p2
    for i in range(1, n):
        state = u[i] < (stay_observed if state else leave_missing)
        z[i] = state
    return z


# E[Z] = 1.0, 0.9, 0.8, 0.7, 0.6, 0.5
TABLE_SETTINGS = Registry({
    1: (0.0, 1.0),
    2: (0.05, 0.45),
    3: (0.05, 0.20),
    4: (0.05, 0.35 / 3.0),
    5: (0.10, 0.15),
    6: (0.10, 0.10),
}, types=lambda pair: MissingnessModel(*pair), missing=UnknownSetting, key_type=int)
