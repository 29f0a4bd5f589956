"""Exception hierarchy shared across the package."""


class ChartExtractError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ChartExtractError):
    """A document failed to parse or violated a field invariant.

    ``field`` names the offending field (dotted path) when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class AxisFitError(ChartExtractError):
    """No consistent axis scale could be fitted to the tick points."""
