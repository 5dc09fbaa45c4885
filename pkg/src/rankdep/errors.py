"""Exception hierarchy shared by every module."""


class RankDepError(Exception):
    """Base class for all errors raised by rankdep."""


class DataError(RankDepError, ValueError):
    """Input data cannot be used (bad cells, too few rows, degenerate axes)."""


class ColumnNotFoundError(DataError, KeyError):
    """A requested column name or index does not exist in the input file."""

    def __str__(self):
        return Exception.__str__(self)


class TieError(DataError):
    """Ties are present and the tie policy forbids them."""


class ModelSpecError(RankDepError, ValueError):
    """A copula or marginal description string could not be parsed."""


class InvariantViolation(RankDepError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
