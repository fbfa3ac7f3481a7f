"""Exception types shared across the package."""


class MalacertError(Exception):
    """Base class for all package errors."""


class NonFiniteError(MalacertError):
    """A potential evaluation or chain update produced NaN or infinity."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class DomainError(MalacertError):
    """An input violates a stated admissibility range (stepsize, radius, ...)."""


class AssumptionError(MalacertError):
    """Required assumption constants are missing or inconsistent."""


class DimensionError(MalacertError):
    """Operation only defined for a specific dimension."""


class UnknownKindError(MalacertError):
    """Unknown builtin potential identifier."""


class InvalidParamError(MalacertError):
    """Builtin potential parameters are outside the supported range."""


class DegenerateShellError(MalacertError):
    """Probing shell is empty (radius does not exceed the exclusion ball)."""


class ConfigError(MalacertError):
    """Run configuration is malformed or incomplete."""
