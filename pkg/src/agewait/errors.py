"""Exception types shared across the package."""


class AgeWaitError(Exception):
    """Base class for all agewait errors."""


class DomainError(AgeWaitError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UnsupportedModelError(AgeWaitError):
    """The operation requires a stationary-ergodic model (e.g. not a trace)."""


class UndefinedCorrelationError(AgeWaitError):
    """Lag-1 correlation requested for a zero-variance process."""


class InfeasibleError(AgeWaitError):
    """The update-frequency constraint cannot be met."""


class UnboundedPenaltyError(AgeWaitError):
    """The expected stage penalty is not finite at the maximum wait."""


class DegenerateModelError(AgeWaitError):
    """The model violates E[Y] > 0."""


class ConfigError(AgeWaitError, ValueError):
    """Invalid experiment configuration; message carries the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
