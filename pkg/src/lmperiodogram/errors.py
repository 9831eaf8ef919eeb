"""Exception hierarchy shared by all modules."""


class LmPeriodogramError(Exception):
    """Base class for errors raised by this package."""


class ModelError(LmPeriodogramError, ValueError):
    """Invalid filter or innovation specification (non-stationary AR part, |d| >= 1/2)."""


class SingularityError(LmPeriodogramError, ValueError):
    """A spectral quantity was requested where the spectral density is singular or zero."""


class DegenerateDataError(LmPeriodogramError):
    """The data produced an undefined statistic, e.g. the log of a zero periodogram ordinate."""


class NumericalDegeneracyError(LmPeriodogramError, ArithmeticError):
    """A covariance matrix or conditional variance lost positive definiteness."""


class ResourceError(LmPeriodogramError):
    """A computation exceeds its configured cost cap."""
