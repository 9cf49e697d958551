"""
Exceptions raised by the gmwmx package.

Every failure has its own small class. The three category bases decide the
exit code the command line interface returns.
"""


class UsageError(Exception):
    """Raised when a request is malformed before any data is touched."""
    pass


class DataError(Exception):
    """Raised when input data cannot support the requested computation."""
    pass


class NumericalError(Exception):
    """Raised when a computation breaks down numerically."""
    pass


class ModelStringError(UsageError):
    """Raised if a noise model string cannot be parsed."""
    pass


class UnknownSetting(UsageError):
    """Raised if a simulation setting or missingness row is not defined."""
    pass


class ParseError(DataError):
    """Raised if an input series file is malformed.

    :param message: Description of the problem
    :param lineno: 1-based line number in the offending file, if known
    """
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = "line {0}: {1}".format(lineno, message)
        super(ParseError, self).__init__(message)
        self.lineno = lineno


class NonMonotoneEpochs(DataError):
    """Raised if the epochs of a series are not increasing."""
    pass


class DuplicateEpoch(DataError):
    """Raised if the same epoch appears twice in a series."""
    pass


class SeriesTooShort(DataError):
    """Raised if a series is shorter than the wavelet filter it is given to."""
    pass


class ScaleBudgetExceeded(DataError):
    """Raised if more wavelet scales are requested than the series allows."""
    pass


class AllMissing(DataError):
    """Raised if an observation mask contains no observed entry."""
    pass


class DegenerateChain(DataError):
    """Raised if both transition probabilities of the missingness chain are zero."""
    pass


class InsufficientLags(DataError):
    """Raised if a covariance summary is shorter than the largest filter."""
    pass


class RankDeficientDesign(DataError):
    """Raised if the design matrix does not have full column rank."""
    pass


class SingularMaskedDesign(DataError):
    """Raised if the masked design matrix cannot be inverted.

    :param message: Description of the problem
    :param condition_number: Condition number of the masked design
    """
    def __init__(self, message, condition_number=None):
        super(SingularMaskedDesign, self).__init__(message)
        self.condition_number = condition_number


class Unidentifiable(DataError):
    """Raised if a noise model has more parameters than wavelet scales."""
    pass


class FactorizationFailure(NumericalError):
    """Raised if a covariance matrix is not numerically positive definite."""
    pass


class NonStationaryComponentPresent(NumericalError):
    """Raised if an autocovariance is requested for a non-stationary model."""
    pass


class OracleSizeExceeded(NumericalError):
    """Raised if a dense trace computation is requested above its size cap."""
    pass


class CapExceeded(NumericalError):
    """Raised if the exact non-stationary covariance path is requested above its cap."""
    pass


class NonConvergence(NumericalError):
    """Raised if no optimizer start converged and no fallback was allowed."""
    pass
