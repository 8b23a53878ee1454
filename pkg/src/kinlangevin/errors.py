"""Exception types shared across the package."""


class ChainDivergedError(RuntimeError):
    """A chain produced a non-finite coordinate or gradient.

    Carries the offending state so callers can inspect where the
    trajectory blew up.
    """

    def __init__(self, message, state=None, replica=None, step=None):
        super().__init__(message)
        self.state = state
        self.replica = replica
        self.step = step


class UnstableParametersError(ValueError):
    """Discrete transition is not contracting (spectral radius >= 1)."""


class ScheduleUndefinedError(ValueError):
    """Schedule inputs fall outside the domain of the step-count formulas."""


class ConfigError(ValueError):
    """Malformed experiment config; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
