"""Exception hierarchy.

Data problems (bad files, mismatched universes) derive from :class:`DataError`;
numerical degeneracies derive from :class:`NumericError`. The CLI maps the two
families to distinct exit codes.
"""


class CorrFilterError(Exception):
    """Base class for every error raised by the package."""


class DataError(CorrFilterError):
    pass


class NumericError(CorrFilterError):
    pass


class UsageError(CorrFilterError, ValueError):
    pass


# ingest
class MissingCell(DataError):
    pass


class NonPositivePrice(DataError):
    pass


class UnparsableDate(DataError):
    pass


class DuplicateTicker(DataError):
    pass


class EmptyLabel(DataError):
    pass


class UnknownTicker(DataError):
    pass


class DegenerateMarketIndex(NumericError):
    pass


# correlation
class ZeroVariance(NumericError):
    def __init__(self, ticker):
        super().__init__(f"series {ticker!r} has zero (weighted) variance")
        self.ticker = ticker


class OutOfRangeCorrelation(NumericError):
    pass


# filtergraph / dbht
class NotMaximalPlanar(NumericError):
    pass


class InconsistentInputs(NumericError):
    pass


# clustering
class InvalidClusterCount(UsageError):
    pass


# metrics
class UniverseMismatch(DataError):
    pass


class UndefinedForSingleCluster(NumericError):
    pass


class DegenerateDenominator(NumericError):
    pass


class DomainError(NumericError, ValueError):
    pass


# dynamics
class WindowTooLong(UsageError):
    pass


class DegenerateReplica(NumericError):
    pass
