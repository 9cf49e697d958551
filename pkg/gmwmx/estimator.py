"""
One-step GMWMX: least squares for the trajectory, GMWM for the noise.

The pipeline fits the trajectory by least squares on the observed epochs,
estimates the missingness chain from the mask, matches the empirical WV of
the residuals to the model WV under a ladder of weight matrices, and
finally evaluates the sandwich covariance of the trajectory estimate under
the fitted noise.
"""

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, optimize, special, stats
from scipy.signal import fftconvolve

from . import missingness as mm
from . import noise
from .config import FitConfig
from .errors import (FactorizationFailure, NonConvergence, NonMonotoneEpochs,
                     RankDeficientDesign, ScaleBudgetExceeded, SingularMaskedDesign,
                     Unidentifiable)
from .longmemory import long_memory_quantiles
from .theo_wv import ResidualCorrection, WvEvaluator, orthonormal_basis
from .wavelet import default_scales, empirical_wv
from .wv_cov import wv_cov

logger = logging.getLogger(__name__)

ANNUAL = 1.0 / 365.25
SEMIANNUAL = 2.0 / 365.25
CONDITION_LIMIT = 1e12
LAMBDA_CUTOFF = 1e-12
BAD_OBJECTIVE = 1e300


@dataclass
class TrajectoryModel:
    """Deterministic part of a position series.

    Columns are ordered as intercept, trend, one cosine and sine pair per
    frequency, then one step column per offset.

    :var reference_epoch: t0 in MJD, None for the first epoch
    :var include_trend: Add the t - t0 column
    :var seasonal_frequencies: Frequencies in cycles per day
    :var offset_epochs: Epochs of the position jumps, MJD"""
    reference_epoch: Optional[float] = None
    include_trend: bool = True
    seasonal_frequencies: Sequence[float] = (ANNUAL, SEMIANNUAL)
    offset_epochs: Sequence[float] = ()

    @property
    def p(self):
        return 1 + int(self.include_trend) + 2 * len(self.seasonal_frequencies) \
            + len(self.offset_epochs)

    @property
    def column_names(self):
        names = ['intercept']
        if self.include_trend:
            names.append('trend')
        for k in range(1, len(self.seasonal_frequencies) + 1):
            names.extend(['cos{0}'.format(k), 'sin{0}'.format(k)])
        names.extend('offset_{0:g}'.format(e) for e in self.offset_epochs)
        return names


def build_design(epochs, traj):
    """n x p design matrix of a trajectory model at the given epochs."""
    t = np.asarray(epochs, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError('epochs must be a non-empty vector')
    if np.any(np.diff(t) <= 0.0):
        raise NonMonotoneEpochs('Epochs must be strictly increasing')
    t0 = t[0] if traj.reference_epoch is None else traj.reference_epoch
    columns = [np.ones_like(t)]
    if traj.include_trend:
        columns.append(t - t0)
    for f in traj.seasonal_frequencies:
        phase = 2.0 * np.pi * f * (t - t0)
        columns.extend([np.cos(phase), np.sin(phase)])
    for e in traj.offset_epochs:
        columns.append((t >= e).astype(float))
    return np.column_stack(columns)


def least_squares_missing(X, y_tilde, z):
    """Least squares on the observed rows, by QR of the masked design.

    :returns: (beta_hat, residuals); residuals are exactly zero where z = 0
    :raises SingularMaskedDesign: if the masked design is ill-conditioned"""
    z = np.asarray(z, dtype=float)
    Xt = np.asarray(X, dtype=float) * z[:, None]
    yt = np.asarray(y_tilde, dtype=float) * z
    if Xt.shape[1] > int(z.sum()):
        raise SingularMaskedDesign('Fewer observations than regressors', np.inf)
    q, r = linalg.qr(Xt, mode='economic')
    with np.errstate(divide='ignore'):
        cond = np.linalg.cond(r)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularMaskedDesign(
            'Masked design is singular (condition number {0:.3g})'.format(cond), cond)
    beta = linalg.solve_triangular(r, q.T @ yt)
    residuals = yt - Xt @ beta
    return beta, residuals


class _Transform(object):
    """Maps one parameter between its admissible interval and the real line."""
    def __init__(self, low, high):
        self.low = 0.0 if low is None else low
        self.high = high

    def forward(self, x):
        if self.high is None:
            return np.log(x - self.low)
        return special.logit((x - self.low) / (self.high - self.low))

    def inverse(self, t):
        if self.high is None:
            return self.low + np.exp(t)
        return self.low + (self.high - self.low) * special.expit(t)


@dataclass
class GmwmFit:
    """Result of one GMWM minimization.

    :var model: Fitted :class:`.noise.NoiseModel`
    :var objective: Objective at the returned point
    :var converged: Whether the best start reported convergence
    :var starts: Number of starts that were run"""
    model: noise.NoiseModel
    objective: float
    converged: bool
    starts: int


def _start_points(template, nu_hat, n_starts, rng, start=None):
    """Start vectors for the simplex search.

    The first start is ``start`` when given. Otherwise its variances split
    2 nu_hat_1 in the proportions of the template. Further starts are drawn
    at random on the same scale."""
    bounds = template.search_bounds()
    is_var = template.variance_mask
    scale = max(2.0 * nu_hat[0], np.finfo(float).tiny)
    if start is not None:
        first = start.vector.copy()
    else:
        first = template.vector.copy()
        total = first[is_var].sum()
        if total > 0.0:
            first[is_var] = first[is_var] * scale / total
        else:
            first[is_var] = scale / is_var.sum()
    starts = [first]
    for _ in range(1, n_starts):
        point = np.empty(len(bounds))
        for i, (low, high) in enumerate(bounds):
            if is_var[i]:
                point[i] = scale * np.exp(rng.uniform(np.log(1e-3), 0.0))
            elif high is not None:
                point[i] = low + (high - low) * rng.uniform(0.05, 0.95)
            elif not low:
                point[i] = np.exp(rng.uniform(np.log(1e-3), 0.0))
            else:
                point[i] = low + rng.uniform(0.1, 2.0)
        starts.append(point)
    for point in starts:
        for i, (low, high) in enumerate(bounds):
            low = 0.0 if low is None else low
            if is_var[i]:
                point[i] = max(point[i], 1e-8 * scale)
            elif high is None:
                point[i] = max(point[i], low + 1e-6)
            else:
                margin = 1e-6 * (high - low)
                point[i] = min(max(point[i], low + margin), high - margin)
    return starts


def gmwm_fit(nu_hat, model_template, m=None, omega=None, residual_ctx=None, config=None,
             evaluator=None, start=None, strict=False):
    """Minimizes (nu_hat - nu(gamma))^T omega (nu_hat - nu(gamma)).

    Runs a Nelder-Mead search from several starts on transformed parameters
    (log for variances and half-bounded parameters, logit for bounded ones).

    :param nu_hat: :class:`.wavelet.WvSpectrum` of the residuals
    :param model_template: :class:`.noise.NoiseModel` fixing the components
    :param m: Missingness chain, None for complete data
    :param omega: J x J weight matrix, identity when None
    :param residual_ctx: Design matrix, or a prepared
        :class:`.theo_wv.ResidualCorrection`, for the residual correction
    :param evaluator: Prepared :class:`.theo_wv.WvEvaluator`; overrides
        ``m`` and ``residual_ctx``
    :param start: Optional :class:`.noise.NoiseModel` used as first start
    :param strict: Raise instead of warn when no start converged
    :raises Unidentifiable: if the model has more parameters than scales
    :raises NonConvergence: if ``strict`` and no start converged"""
    config = FitConfig() if config is None else config
    J = nu_hat.J
    q = model_template.q
    if q > J:
        raise Unidentifiable('{0} noise parameters cannot be fitted from {1} scales'.format(q, J))
    if evaluator is None:
        correction = residual_ctx
        if residual_ctx is not None and not isinstance(residual_ctx, ResidualCorrection):
            correction = ResidualCorrection(residual_ctx)
        evaluator = WvEvaluator(model_template, nu_hat.n, J, m, correction)
    omega = np.eye(J) if omega is None else np.asarray(omega)
    target = np.asarray(nu_hat.nu_hat)
    transforms = [_Transform(*b) for b in model_template.search_bounds()]

    def to_model(theta):
        return model_template.with_vector([tr.inverse(t) for tr, t in zip(transforms, theta)])

    def raw_objective(theta):
        try:
            resid = target - evaluator(to_model(theta))
        except (ValueError, FloatingPointError):
            return BAD_OBJECTIVE
        value = float(resid @ omega @ resid)
        return value if np.isfinite(value) else BAD_OBJECTIVE

    rng = np.random.default_rng(config.seed)
    starts = _start_points(model_template, target, config.n_starts, rng, start)
    thetas = [np.array([tr.forward(x) for tr, x in zip(transforms, s)]) for s in starts]
    scale = max(raw_objective(thetas[0]), np.finfo(float).tiny)
    options = {'maxiter': config.max_iter_per_param * q,
               'maxfev': 2 * config.max_iter_per_param * q,
               'xatol': config.xtol, 'fatol': config.ftol}
    best = None
    for idx, theta0 in enumerate(thetas):
        res = optimize.minimize(lambda th: raw_objective(th) / scale, theta0,
                                method='Nelder-Mead', options=options)
        logger.debug('Start %d: objective %.6g after %d iterations (success=%s)',
                     idx, res.fun * scale, res.nit, res.success)
        if best is None or res.fun < best.fun:
            best = res
    converged = bool(best.success)
    if not converged and strict:
        raise NonConvergence('No optimizer start converged within {0} iterations'.format(
            options['maxiter']))
    if not converged:
        warnings.warn('No optimizer start converged; returning the best point', RuntimeWarning)
    return GmwmFit(to_model(best.x), float(best.fun * scale), converged, len(thetas))


def phi_hat(X, model, m=None):
    """Sandwich covariance of the least-squares trajectory estimate.

    Phi = mu^-2 (X^T X)^-1 X^T {[Lambda + mu^2 11^T] * Sigma} X (X^T X)^-1,
    evaluated without n x n matrices: stationary parts by FFT Toeplitz
    products, the flicker part through its triangular factor for the mu^2
    term and by a truncated sweep over lags for the Lambda term."""
    X = np.asarray(X, dtype=float)
    orthonormal_basis(X)
    n, p = X.shape
    m = mm.NO_MISSING if m is None else m
    mu = mm.stationary_mean(m)
    lam = mm.lag_autocovariance(m, n)
    mod = lam + mu * mu
    middle = np.zeros((p, p))
    acov = np.zeros(n)
    for c in model.components:
        if c.stationary:
            acov += c.autocovariance(n)
            continue
        h = c.kernel(n)
        ux = fftconvolve(h[::-1, None], X, axes=0)[n - 1:]
        middle += mu * mu * c.sigma2 * (ux.T @ ux)
        if lam[0] > 0.0:
            above = np.nonzero(np.abs(lam) >= LAMBDA_CUTOFF * lam[0])[0]
            for k in range(int(above.max()) + 1):
                weights = lam[k] * c.diagonal(n, k)
                block = (X[:n - k] * weights[:, None]).T @ X[k:]
                middle += block if k == 0 else block + block.T
    if np.any(acov != 0.0):
        middle += X.T @ linalg.matmul_toeplitz(acov * mod, X)
    gram = X.T @ X
    try:
        factor = linalg.cho_factor(gram)
    except linalg.LinAlgError:
        raise RankDeficientDesign('X^T X is not positive definite')
    left = linalg.cho_solve(factor, middle)
    phi = linalg.cho_solve(factor, left.T) / (mu * mu)
    return 0.5 * (phi + phi.T)


@dataclass
class FitResult:
    """Output of :func:`one_step_gmwmx`.

    :var beta_hat: Trajectory estimate
    :var Phi_hat: Covariance matrix of ``beta_hat``
    :var gamma_hat: Fitted :class:`.noise.NoiseModel`
    :var theta_hat_missing: Estimated :class:`.missingness.MissingnessModel`
    :var wv_empirical: :class:`.wavelet.WvSpectrum` of the residuals
    :var wv_fitted: Model WV at ``gamma_hat``
    :var objective_value: GMWM objective under the optimal weight
    :var ci: p x 2 array of interval ends
    :var timing: Seconds spent per stage"""
    beta_hat: np.ndarray
    Phi_hat: np.ndarray
    gamma_hat: noise.NoiseModel
    theta_hat_missing: mm.MissingnessModel
    wv_empirical: object
    wv_fitted: np.ndarray
    objective_value: float
    ci: np.ndarray
    column_names: list
    ci_level: float = 0.95
    converged: bool = True
    timing: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def std_error(self):
        return np.sqrt(np.clip(np.diag(self.Phi_hat), 0.0, None))

    def covers(self, beta_true):
        """Per-coefficient indicator that the interval contains ``beta_true``."""
        beta_true = np.asarray(beta_true, dtype=float)
        return (self.ci[:, 0] <= beta_true) & (beta_true <= self.ci[:, 1])


class _Stopwatch(object):
    def __init__(self):
        self.timing = {}
        self._last = time.perf_counter()

    def lap(self, stage):
        now = time.perf_counter()
        self.timing[stage] = now - self._last
        self._last = now
        logger.debug('Stage %s took %.3f s', stage, self.timing[stage])


def _memory_parameter(model):
    """d = alpha / 2 of the power-law component, None when there is none."""
    for c in model.components:
        if c.kind == 'pl' and 0.0 < c.alpha < 1.0:
            return c.alpha / 2.0
    return None


def _zero_noise(template):
    """The template with every variance set to zero."""
    vector = template.vector.copy()
    vector[template.variance_mask] = 0.0
    return template.with_vector(vector)


def _weight_from(model, n, J, config, fallback):
    """Inverse WV covariance at ``model``, or ``fallback`` if it is degenerate."""
    try:
        cov = wv_cov(model, n, J, config.nonstationary_cap)
        return cov.inverse(config.ridge), cov
    except FactorizationFailure as e:
        logger.warning('Keeping the previous weight matrix: %s', e)
        return fallback, None


def one_step_gmwmx(ts, traj, template, config=None, strict=False):
    """Fits trajectory and noise of one series.

    :param ts: Series with ``epochs``, ``values`` and ``mask``
    :param traj: :class:`TrajectoryModel`
    :param template: :class:`.noise.NoiseModel` to fit
    :param config: :class:`.config.FitConfig`
    :param strict: Raise :class:`.errors.NonConvergence` when the final fit
        did not converge"""
    config = FitConfig() if config is None else config
    clock = _Stopwatch()

    X = build_design(ts.epochs, traj)
    n = X.shape[0]
    beta, residuals = least_squares_missing(X, ts.values, ts.mask)
    clock.lap('least_squares')

    m = mm.estimate(ts.mask)
    mu = mm.stationary_mean(m)
    clock.lap('missingness')

    J = config.scales if config.scales is not None else default_scales(n)
    if 2 ** J > n:
        raise ScaleBudgetExceeded('{0} scales need at least {1} values'.format(J, 2 ** J))
    if template.q > J:
        raise Unidentifiable('{0} noise parameters cannot be fitted from {1} scales'.format(
            template.q, J))
    spectrum = empirical_wv(residuals, J)
    correction = ResidualCorrection(X) if config.correction == 'residual' else None
    evaluator = WvEvaluator(template, n, J, m, correction)
    clock.lap('wavelet_variance')

    diagnostics = {'n': n, 'J': J, 'objectives': {}}
    converged = True
    if not np.any(spectrum.nu_hat > 0.0):
        fitted = _zero_noise(template)
        objective = 0.0
        clock.lap('gmwm')
    else:
        pilot = gmwm_fit(spectrum, template, config=config, evaluator=evaluator)
        diagnostics['objectives']['identity'] = pilot.objective
        variances = wv_cov(pilot.model, n, J, config.nonstationary_cap).variances
        if np.all(variances > 0.0) and np.all(np.isfinite(variances)):
            omega = np.diag(1.0 / variances)
        else:
            omega = np.eye(J)
        diagonal = gmwm_fit(spectrum, template, omega=omega, config=config,
                            evaluator=evaluator, start=pilot.model)
        diagnostics['objectives']['diagonal'] = diagonal.objective
        omega_star, cov = _weight_from(diagonal.model, n, J, config, omega)
        if cov is not None:
            diagnostics['wv_cov_method'] = cov.method.value
        final = gmwm_fit(spectrum, template, omega=omega_star, config=config,
                         evaluator=evaluator, start=diagonal.model, strict=strict)
        diagnostics['objectives']['optimal'] = final.objective
        fitted, objective, converged = final.model, final.objective, final.converged
        clock.lap('gmwm')

    phi = phi_hat(X, fitted, m)
    se = np.sqrt(np.clip(np.diag(phi), 0.0, None))
    d = _memory_parameter(fitted)
    if config.long_memory and d is not None:
        table = long_memory_quantiles(X, d, config.long_memory_reps, config.seed, mu,
                                      config.long_memory_grid)
        low, high = table.studentized(config.ci_level)
        ci = np.column_stack([beta - high * se, beta - low * se])
        diagnostics['interval'] = 'long-memory'
    else:
        z = stats.norm.ppf(0.5 + 0.5 * config.ci_level)
        ci = np.column_stack([beta - z * se, beta + z * se])
        diagnostics['interval'] = 'gaussian'
    clock.lap('inference')

    wv_fitted = evaluator(fitted)
    logger.info('Fitted %s with missingness p1=%.4g p2=%.4g (n=%d, J=%d)',
                fitted, m.p1, m.p2, n, J)
    return FitResult(beta_hat=beta, Phi_hat=phi, gamma_hat=fitted, theta_hat_missing=m,
                     wv_empirical=spectrum, wv_fitted=wv_fitted, objective_value=objective,
                     ci=ci, column_names=traj.column_names, ci_level=config.ci_level,
                     converged=converged, timing=clock.timing, diagnostics=diagnostics)

