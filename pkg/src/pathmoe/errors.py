"""Exception types shared across the package.

The CLI maps these onto exit codes (configuration 2, I/O and parsing 3,
consistency 4), so library code should raise the most specific type that
applies instead of bare ValueError.
"""


class PathmoeError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(PathmoeError):
    """Operand shapes do not conform."""


class ConfigurationError(PathmoeError):
    """Invalid configuration value, unknown variant, or bad hyperparameter."""


class InputError(PathmoeError):
    """Invalid runtime input: out-of-vocabulary token, non-normalized rows, empty vector."""


class CapacityError(PathmoeError):
    """Sequence longer than the configured positional capacity."""


class ParseError(PathmoeError):
    """Malformed file. Carries a byte offset or line number when known."""

    def __init__(self, message, *, offset=None, line=None):
        detail = message
        if offset is not None:
            detail += f" (byte offset {offset})"
        if line is not None:
            detail += f" (line {line})"
        super().__init__(detail)
        self.offset = offset
        self.line = line


class ConsistencyError(PathmoeError):
    """Artifacts from different runs mixed together (hash mismatch)."""


class MetricUndefinedError(PathmoeError):
    """A metric or likelihood has no defined value for the given data."""


class TrainingError(PathmoeError):
    """Training cannot proceed (e.g. a cohort with no observed events)."""
