"""Exception and warning types raised across the package."""


class ElasticityLabError(Exception):
    """Base class for all errors raised by elasticity_lab."""


class SeriesTooShortError(ElasticityLabError, ValueError):
    pass


class RankError(ElasticityLabError, ValueError):
    """Design matrix is rank deficient.

    ``column`` names the first column that is linearly dependent on the
    columns before it.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class NonStationaryError(ElasticityLabError, ValueError):
    pass


class ParseError(ElasticityLabError, ValueError):
    """Malformed series file; ``row`` is the 1-based line number."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DegenerateEquilibriumError(ElasticityLabError, ValueError):
    pass


class InstabilityError(ElasticityLabError, RuntimeError):
    pass


class BiasPoleError(ElasticityLabError, ValueError):
    pass


class WeakInstrumentWarning(UserWarning):
    pass
