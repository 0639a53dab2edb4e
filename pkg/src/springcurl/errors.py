"""Shared exception types."""


class InvalidInputError(ValueError):
    """An argument is outside its documented domain."""


class NoSolutionError(ValueError):
    """An inverse problem has no solution in the valid range."""


class ProtocolViolationError(RuntimeError):
    """An action is illegal in the current phase or cursor position."""


class ShotTimeoutError(RuntimeError):
    """A shot did not release within the simulated timeout.

    Carries the partial record so callers can log the aborted shot.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class MetricUnavailableError(ValueError):
    """The metric is undefined for the given input (e.g. too few shots)."""


class ModelSpecError(ValueError):
    """The model design is unusable (rank deficiency, missing levels, ...)."""


class InvalidComparisonError(ValueError):
    """Model fits being compared were not computed on identical data."""


class SchemaMismatchError(ValueError):
    """A log or manifest carries an unsupported schema version."""


class TruncatedLogError(ValueError):
    """A log file ends mid-event.

    ``events`` holds the recoverable prefix and ``last_seq`` the sequence
    number of the last complete event.
    """

    def __init__(self, message, events, last_seq):
        super().__init__(message)
        self.events = events
        self.last_seq = last_seq
