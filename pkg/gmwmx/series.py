"""
Position series files and fit reports.

Series are read from and written to a plain text format: header lines
start with ``#`` (``# sampling period <days>`` and repeatable
``# offset <MJD>``), data lines hold ``<MJD> <value>``. Epochs absent from
the file are restored on a regular grid with value 0 and mask 0.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import DuplicateEpoch, NonMonotoneEpochs, ParseError

logger = logging.getLogger(__name__)

GRID_TOLERANCE = 1e-6


@dataclass
class TimeSeries:
    """A regularly sampled series with an observation mask.

    :var epochs: MJD of every grid point
    :var values: Observed values, 0 where missing
    :var mask: 1 where observed, 0 where missing
    :var sampling_period: Grid spacing in days
    :var offsets: Epochs of known position jumps"""
    epochs: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    sampling_period: float = 1.0
    offsets: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.epochs = np.asarray(self.epochs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.mask = np.asarray(self.mask, dtype=np.int8)
        if not len(self.epochs) == len(self.values) == len(self.mask):
            raise ValueError('epochs, values and mask must have equal lengths')
        self.values = np.where(self.mask == 1, self.values, 0.0)

    @property
    def n(self):
        return len(self.epochs)

    @property
    def observed_fraction(self):
        return float(self.mask.mean())

    @classmethod
    def from_observations(cls, epochs, values, sampling_period=1.0, offsets=()):
        """Places scattered observations on the regular grid they belong to."""
        epochs = np.asarray(epochs, dtype=float)
        values = np.asarray(values, dtype=float)
        start = epochs[0]
        steps = (epochs - start) / sampling_period
        index = np.rint(steps).astype(int)
        if np.any(np.abs(steps - index) > GRID_TOLERANCE):
            raise ParseError('Epochs are not on a {0}-day grid'.format(sampling_period))
        n = index[-1] + 1
        grid = start + sampling_period * np.arange(n)
        full = np.zeros(n)
        mask = np.zeros(n, dtype=np.int8)
        full[index] = values
        mask[index] = 1
        return cls(grid, full, mask, sampling_period, list(offsets))


def _header(text, lineno, state):
    words = text.lstrip('#').split()
    if words[:2] == ['sampling', 'period']:
        try:
            state['period'] = float(words[2])
        except (IndexError, ValueError):
            raise ParseError('Bad sampling period header', lineno)
        if state['period'] <= 0.0:
            raise ParseError('Sampling period must be positive', lineno)
    elif words[:1] == ['offset']:
        try:
            state['offsets'].append(float(words[1]))
        except (IndexError, ValueError):
            raise ParseError('Bad offset header', lineno)


def read_mom(path):
    """Reads a series file into a :class:`TimeSeries`."""
    state = {'period': 1.0, 'offsets': []}
    epochs, values = [], []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text:
                continue
            if text.startswith('#'):
                _header(text, lineno, state)
                continue
            fields = text.split()
            if len(fields) < 2:
                raise ParseError('Expected "<MJD> <value>"', lineno)
            try:
                t, v = float(fields[0]), float(fields[1])
            except ValueError:
                raise ParseError('Non-numeric field', lineno)
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ParseError('Non-finite field', lineno)
            if epochs and t == epochs[-1]:
                raise DuplicateEpoch('line {0}: epoch {1} repeated'.format(lineno, t))
            if epochs and t < epochs[-1]:
                raise NonMonotoneEpochs('line {0}: epoch {1} after {2}'.format(
                    lineno, t, epochs[-1]))
            epochs.append(t)
            values.append(v)
    if not epochs:
        raise ParseError('No data lines in {0}'.format(path))
    ts = TimeSeries.from_observations(epochs, values, state['period'], state['offsets'])
    logger.debug('Read %s: %d epochs, %d observed', path, ts.n, int(ts.mask.sum()))
    return ts


def _number(x):
    return '{0:.17g}'.format(x)


def write_mom(path, ts):
    """Writes the observed epochs of a series; read_mom restores the gaps."""
    with open(path, 'w') as f:
        f.write('# sampling period {0}\n'.format(_number(ts.sampling_period)))
        for e in ts.offsets:
            f.write('# offset {0}\n'.format(_number(e)))
        for t, v, z in zip(ts.epochs, ts.values, ts.mask):
            if z:
                f.write('{0} {1}\n'.format(_number(t), _number(v)))


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def fit_document(fit, config=None, include_timings=True):
    """Ordered dictionary form of a fit report."""
    from . import __version__
    se = fit.std_error
    beta = [{'name': name, 'estimate': _finite(b), 'std_error': _finite(s),
             'ci_low': _finite(lo), 'ci_high': _finite(hi)}
            for name, b, s, (lo, hi) in zip(fit.column_names, fit.beta_hat, se, fit.ci)]
    gamma = [{'name': name, 'estimate': _finite(g)}
             for name, g in zip(fit.gamma_hat.parameter_names, fit.gamma_hat.vector)]
    m = fit.theta_hat_missing
    spectrum = fit.wv_empirical
    wv = [{'scale': int(j), 'empirical': _finite(e), 'fitted': _finite(t)}
          for j, e, t in zip(spectrum.scales, spectrum.nu_hat, fit.wv_fitted)]
    timings = None
    if include_timings:
        timings = {k: _finite(v) for k, v in fit.timing.items()}
    return {
        'beta': beta,
        'ci_level': _finite(fit.ci_level),
        'noise_model': str(fit.gamma_hat),
        'gamma': gamma,
        'missingness': {'p1': _finite(m.p1), 'p2': _finite(m.p2), 'mu': _finite(m.mu)},
        'wv': wv,
        'objective': _finite(fit.objective_value),
        'converged': bool(fit.converged),
        'timings': timings,
        'config': None if config is None else config.as_dict(),
        'version': __version__,
    }


def _to_json(obj, level=0):
    """JSON text of a report, floats with 17 significant digits."""
    pad = '  ' * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = ['{0}{1}: {2}'.format(pad, json.dumps(str(k)), _to_json(v, level + 1))
                 for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + pad[2:] + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [pad + _to_json(v, level + 1) for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + pad[2:] + ']'
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return 'null'
        return '{0:.17g}'.format(obj)
    return json.dumps(obj)


def write_fit(path, fit, config=None, include_timings=True):
    """Writes a fit report as JSON with a fixed key order.

    Floats carry 17 significant digits, so parsing the file recovers every
    number bit for bit."""
    doc = fit_document(fit, config, include_timings)
    with open(path, 'w') as f:
        f.write(_to_json(doc))
        f.write('\n')
