"""Exception types raised across the package."""


class ContractViolation(ValueError):
    """An input broke a stated precondition (shape, symmetry, dimension)."""


class DomainError(ValueError):
    """A point or parameter lies outside the admissible domain."""


class EvaluationError(ArithmeticError):
    """A field or integrand produced a non-finite value."""


class TruncationError(ArithmeticError):
    """An integrand does not decay inside the truncated integration window."""


class FrameError(ValueError):
    """A frame matrix is singular at the requested point."""


class ConfigError(ValueError):
    """Invalid suite or model configuration."""
