"""Exception hierarchy.

Data and configuration problems derive from :class:`DataError`; failures
inside the estimators derive from :class:`EstimationError`. The command line
maps the first family to exit status 2 and the second to exit status 1.
"""


class TradeIVError(Exception):
    """Base class for all package errors."""


class DomainError(TradeIVError, ValueError):
    """An argument lies outside the domain of a function."""


class DataError(TradeIVError):
    """Input data or configuration is unusable."""


class ConfigError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class IntegrityError(DataError):
    pass


class CoverageError(DataError):
    def __init__(self, message, gaps=()):
        self.gaps = list(gaps)
        super().__init__(message)


class UndefinedShareError(DataError):
    pass


class SelectionError(DataError):
    pass


class DegenerateSeriesError(DomainError):
    pass


class EstimationError(TradeIVError):
    """An estimator could not produce a result."""


class CollinearityError(EstimationError):
    def __init__(self, message, columns=()):
        self.columns = list(columns)
        super().__init__(message)


class IdentificationError(EstimationError):
    pass


class NoVariationError(EstimationError):
    pass


class BandwidthError(EstimationError):
    pass


class SingularityError(EstimationError, DomainError):
    """The structural configuration has no finite solution."""
