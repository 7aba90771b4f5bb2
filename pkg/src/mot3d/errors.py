"""Exception types shared across the package.

Config/usage problems and data problems are kept distinct so the CLI can map
them to different exit codes (1 and 2 respectively).
"""


class Mot3DError(Exception):
    """Base class for all package errors."""


class ConfigError(Mot3DError):
    """Invalid configuration or usage (bad flag combination, bad config file)."""


class DataError(Mot3DError):
    """Invalid input data (parse failures, schema violations, bad streams)."""


class ParseError(DataError):
    """A malformed row in an input file; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    """A required column or field is missing from an input file."""


class FilterError(Mot3DError):
    """Kalman filter failure, e.g. a numerically singular innovation covariance."""


class UndefinedMetricError(Mot3DError):
    """A metric is undefined for the given input (e.g. no ground truth objects)."""
