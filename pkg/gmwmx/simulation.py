"""
Monte Carlo harness for the estimator.

A :class:`SettingSpec` fixes the true noise, the missingness chain, the
length and the true trajectory. :func:`run_setting` simulates and fits
every replicate, in parallel through joblib, and aggregates the results in
a :class:`MetricReport`.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import missingness as mm
from . import noise
from .config import FitConfig, worker_count
from .errors import DataError, NumericalError, UnknownSetting
from .estimator import TrajectoryModel, build_design, one_step_gmwmx
from .params import Registry
from .series import TimeSeries

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365
START_EPOCH = 51544.0

SETTING_A = 'wn(10)+pl(6,0.9)'
SETTING_B = 'wn(50)+fl(10)'
SETTING_C = 'wn(20)+matern(8,0.05,1.1)'


@dataclass
class SettingSpec:
    """One simulation design.

    :var name: Label used in reports
    :var noise: True :class:`.noise.NoiseModel`
    :var missingness: True :class:`.missingness.MissingnessModel`
    :var n: Series length in daily epochs
    :var reps: Number of replicates
    :var beta: True trajectory coefficients, None for zeros
    :var seed: Master seed; replicate i draws from (seed, i)
    :var trajectory: :class:`.estimator.TrajectoryModel` used to simulate and fit"""
    name: str
    noise: noise.NoiseModel
    missingness: mm.MissingnessModel
    n: int = 10 * DAYS_PER_YEAR
    reps: int = 500
    beta: Optional[np.ndarray] = None
    seed: int = 0
    trajectory: TrajectoryModel = field(default_factory=TrajectoryModel)

    def __post_init__(self):
        if self.n < 8:
            raise ValueError('n must be at least 8')
        if self.reps < 1:
            raise ValueError('reps must be at least 1')
        if self.beta is None:
            self.beta = np.zeros(self.trajectory.p)
        self.beta = np.asarray(self.beta, dtype=float)
        if len(self.beta) != self.trajectory.p:
            raise ValueError('beta must have {0} entries'.format(self.trajectory.p))

    @property
    def template(self):
        """Noise model of the same structure with neutral starting values."""
        return noise.NoiseModel.parse('+'.join(c.kind for c in self.noise.components))

    @property
    def epochs(self):
        return START_EPOCH + np.arange(self.n, dtype=float)


def _preset(noise_string, missing_rows, years):
    return {'noise': noise_string, 'missing': missing_rows, 'years': years}


# Settings *1 vary the length at 10% missing data, settings *2 vary the
# missingness at 20 years.
PRESETS = Registry({
    'A1': _preset(SETTING_A, (2,), (10, 20, 30, 40)),
    'A2': _preset(SETTING_A, (1, 2, 3, 4, 5, 6), (20,)),
    'B1': _preset(SETTING_B, (2,), (10, 20, 30, 40)),
    'B2': _preset(SETTING_B, (1, 2, 3, 4, 5, 6), (20,)),
    'C1': _preset(SETTING_C, (2,), (10, 20, 30, 40)),
    'C2': _preset(SETTING_C, (1, 2, 3, 4, 5, 6), (20,)),
}, missing=UnknownSetting, key_type=lambda k: str(k).upper())


def preset(name, n=None, missing=None, reps=500, seed=0):
    """A :class:`SettingSpec` from a named preset.

    :param n: Length, default the first length of the preset
    :param missing: Missingness row 1..6, default the first row of the preset"""
    entry = PRESETS[name]
    n = entry['years'][0] * DAYS_PER_YEAR if n is None else n
    row = entry['missing'][0] if missing is None else missing
    label = '{0}-n{1}-m{2}'.format(str(name).upper(), n, row)
    return SettingSpec(label, noise.NoiseModel.parse(entry['noise']),
                       mm.TABLE_SETTINGS[row], n, reps, seed=seed)


def preset_grid(name, reps=500, seed=0):
    """Every (length, missingness) combination of a preset."""
    entry = PRESETS[name]
    return [preset(name, years * DAYS_PER_YEAR, row, reps, seed)
            for years in entry['years'] for row in entry['missing']]


@dataclass
class ReplicateOutcome:
    """Estimates of one replicate, or the reason it failed."""
    index: int
    beta_hat: Optional[np.ndarray] = None
    std_error: Optional[np.ndarray] = None
    ci: Optional[np.ndarray] = None
    gamma_hat: Optional[np.ndarray] = None
    runtime: float = float('nan')
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


def simulate_replicate(spec, index):
    """The series of replicate ``index``, drawn from the stream (seed, index)."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, index]))
    X = build_design(spec.epochs, spec.trajectory)
    y = X @ spec.beta + noise.simulate(spec.noise, spec.n, rng)
    z = mm.simulate(spec.missingness, spec.n, rng)
    return TimeSeries(spec.epochs, y, z, offsets=list(spec.trajectory.offset_epochs))


def run_replicate(spec, config, index):
    """Simulates and fits one replicate; failures are recorded, not raised."""
    start = time.perf_counter()
    try:
        ts = simulate_replicate(spec, index)
        fit = one_step_gmwmx(ts, spec.trajectory, spec.template, config)
    except (DataError, NumericalError, ValueError) as e:
        logger.warning('Replicate %d of %s failed: %s', index, spec.name, e)
        return ReplicateOutcome(index, error='{0}: {1}'.format(type(e).__name__, e))
    return ReplicateOutcome(index, fit.beta_hat, fit.std_error, fit.ci,
                            fit.gamma_hat.vector, time.perf_counter() - start)


def coverage(beta_true, fits, level=0.95):
    """Share of intervals containing the truth, per coefficient.

    :param fits: Objects with a p x 2 ``ci`` array
    :returns: (rates, standard errors); the standard error is the binomial
        one at the nominal level"""
    if not fits:
        raise ValueError('At least one fit is required')
    beta_true = np.asarray(beta_true, dtype=float)
    ci = np.array([f.ci for f in fits])
    hits = (ci[:, :, 0] <= beta_true) & (beta_true <= ci[:, :, 1])
    rates = hits.mean(axis=0)
    se = np.full(len(beta_true), np.sqrt(level * (1.0 - level) / len(fits)))
    return rates, se


@dataclass
class MetricReport:
    """Aggregated Monte Carlo metrics of one setting.

    ``table`` has one row per parameter with bias2, variance, rmse,
    coverage and coverage_se columns (coverage is NaN for noise parameters
    and for coefficients whose intervals all have zero width)."""
    setting: str
    table: pd.DataFrame
    replicates: int
    failures: int
    mean_runtime: float
    errors: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            'setting': self.setting,
            'replicates': self.replicates,
            'failures': self.failures,
            'mean_runtime': self.mean_runtime,
            'metrics': self.table.to_dict(orient='records'),
        }


def _moments(estimates, truth):
    bias = estimates.mean(axis=0) - truth
    variance = estimates.var(axis=0)
    return bias * bias, variance, np.sqrt(bias * bias + variance)


def summarize(spec, outcomes, level=0.95):
    """Aggregates replicate outcomes into a :class:`MetricReport`."""
    good = [o for o in outcomes if o.ok]
    names = spec.trajectory.column_names + spec.noise.parameter_names
    frame = pd.DataFrame({'parameter': names})
    if good:
        beta = np.array([o.beta_hat for o in good])
        gamma = np.array([o.gamma_hat for o in good])
        b2, var, rmse = _moments(np.hstack([beta, gamma]),
                                 np.concatenate([spec.beta, spec.noise.vector]))
        rates, se = coverage(spec.beta, good, level)
        degenerate = np.all(np.array([o.std_error for o in good]) == 0.0, axis=0)
        rates = np.where(degenerate, np.nan, rates)
        q = spec.noise.q
        frame['bias2'] = b2
        frame['variance'] = var
        frame['rmse'] = rmse
        frame['coverage'] = np.concatenate([rates, np.full(q, np.nan)])
        frame['coverage_se'] = np.concatenate([se, np.full(q, np.nan)])
        runtime = float(np.mean([o.runtime for o in good]))
    else:
        for column in ('bias2', 'variance', 'rmse', 'coverage', 'coverage_se'):
            frame[column] = np.nan
        runtime = float('nan')
    errors = [o.error for o in outcomes if not o.ok]
    return MetricReport(spec.name, frame, len(outcomes), len(errors), runtime, errors)


def run_setting(spec, config=None, n_jobs=None):
    """Runs every replicate of a setting and aggregates the metrics.

    :param n_jobs: joblib worker count, default from GMWMX_THREADS or all cores"""
    config = FitConfig() if config is None else config
    n_jobs = worker_count(-1) if n_jobs is None else n_jobs
    logger.info('Running %s: %d replicates of length %d on %s workers',
                spec.name, spec.reps, spec.n, n_jobs)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(run_replicate)(spec, config, i) for i in range(spec.reps))
    report = summarize(spec, outcomes, config.ci_level)
    if report.failures:
        logger.warning('%s: %d of %d replicates failed', spec.name, report.failures,
                       report.replicates)
    return report


def run_grid(specs, config=None, n_jobs=None):
    """Runs several settings; returns the reports and one combined table."""
    reports = [run_setting(spec, config, n_jobs) for spec in specs]
    frames = []
    for spec, report in zip(specs, reports):
        frame = report.table.copy()
        frame.insert(0, 'setting', spec.name)
        frame.insert(1, 'n', spec.n)
        frame.insert(2, 'p_observed', spec.missingness.mu)
        frames.append(frame)
    return reports, pd.concat(frames, ignore_index=True)