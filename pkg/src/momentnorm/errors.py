"""Exception hierarchy shared by every module.

Each error carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit statuses without a lookup table.
"""


class MomentNormError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class UsageError(MomentNormError, ValueError):
    exit_code = 2


class DataError(MomentNormError, ValueError):
    exit_code = 3


class NumericDegeneracy(MomentNormError, ArithmeticError):
    exit_code = 4


class EmptySample(DataError):
    """The sample holds no observations."""


class NonFiniteInput(DataError):
    """The sample contains NaN or an infinity."""


class ParseError(DataError):
    """A data file line could not be read as a number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DegenerateSample(NumericDegeneracy):
    """A variance that the statistic divides by is zero."""


class PerfectCorrelation(NumericDegeneracy):
    """A jackknife correlation is exactly +-1, so its Fisher z is infinite."""


class OutOfDomain(NumericDegeneracy):
    pass


class InvalidN(UsageError):
    pass


class MomentOrderTooLow(UsageError):
    """The population lacks a finite moment the formula needs."""


class InvalidCumulants(UsageError):
    pass


class InvalidSpec(UsageError):
    """An alternative distribution is malformed or has bad parameters."""


class InvalidAlpha(UsageError):
    pass


class Underpowered(UsageError):
    """Too few null replications to estimate the requested quantile."""


class InvalidSeed(UsageError):
    pass
