"""
Generalized method of wavelet moments with exogenous regressors.
"""

__version__ = '0.9.0'

from .config import FitConfig
from .estimator import FitResult, TrajectoryModel, one_step_gmwmx
from .missingness import MissingnessModel
from .noise import NoiseModel
from .series import TimeSeries, read_mom, write_fit, write_mom
