"""Exception types shared across the toolkit."""


class QfidkitError(Exception):
    """Base class for toolkit errors."""


class ShapeError(QfidkitError, ValueError):
    """Operand dimensions are inconsistent."""


class PreconditionError(QfidkitError, ValueError):
    """An operation's stated precondition does not hold."""


class DegenerateInputError(QfidkitError, ValueError):
    """Input is degenerate for the requested operation (e.g. vanishing trace)."""


class ResourceLimitError(QfidkitError, RuntimeError):
    """A configured size cap (block length, dimension) would be exceeded."""


class InvalidOperationError(QfidkitError, ValueError):
    """A Kraus family is not trace-nonincreasing within tolerance."""


class DecompositionError(QfidkitError, RuntimeError):
    """A matrix decomposition failed to converge.

    Carries the residual norm when one is available.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
