"""Contact and para-contact geometry of the thermodynamic phase space, checked numerically."""

from .chart import ChartPoint
from .errors import ConfigError, ContractViolation, DomainError, EvaluationError, FrameError, TruncationError

__all__ = [
    "ChartPoint",
    "ConfigError",
    "ContractViolation",
    "DomainError",
    "EvaluationError",
    "FrameError",
    "TruncationError",
]
__version__ = "0.1.0"
