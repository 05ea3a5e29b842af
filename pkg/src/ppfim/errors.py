"""Exception hierarchy shared by every ppfim module."""


class PpfimError(Exception):
    """Base class for all errors raised by ppfim."""


class InvalidParameterError(PpfimError, ValueError):
    pass


class MalformedInputError(PpfimError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatabaseError(PpfimError, ValueError):
    pass


class DomainError(PpfimError, ValueError):
    """A byte outside the 7-bit range reached the cipher."""


class EmptyPoolError(PpfimError, IndexError):
    pass


class IncompleteAggregationError(PpfimError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"no local report for partition(s) {', '.join(map(str, self.missing))}")


class PhaseError(PpfimError):
    """Wraps a failure inside one pipeline phase, keeping the phase name."""

    def __init__(self, phase, cause):
        self.phase = phase
        self.cause = cause
        super().__init__(f"{phase} phase failed: {cause}")
