"""Exception hierarchy."""


class DecoptError(Exception):
    """Base class for all package errors."""


class DisconnectedGraphError(DecoptError):
    def __init__(self, message, m=None, p=None, attempts=None):
        super().__init__(message)
        self.m = m
        self.p = p
        self.attempts = attempts


class DimensionError(DecoptError, ValueError):
    pass


class DataFormatError(DecoptError, ValueError):
    """Malformed input data; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ProblemError(DecoptError, ValueError):
    pass


class ConvergenceError(DecoptError):
    pass


class DivergenceError(DecoptError):
    """Raised when an iteration produces non-finite values or blows up.

    ``trace`` holds the records collected before the failure so callers can
    still report the divergence point.
    """

    def __init__(self, message, t, trace=None, method=None):
        super().__init__(message)
        self.t = t
        self.trace = list(trace) if trace is not None else []
        self.method = method


class ConfigError(DecoptError, ValueError):
    pass
