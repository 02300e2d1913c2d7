"""Points of the Darboux chart (w, q^1..q^n, p_1..p_n)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError


@dataclass(frozen=True)
class ChartPoint:
    """A point of the (2n+1)-dimensional phase-space chart.

    Coordinates are stored in the order ``(w, q^1..q^n, p_1..p_n)``, which is
    also the index layout ``0 | 1..n | n+1..2n`` used by every frame.
    """

    n: int
    w: float
    q: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation(f"n must be >= 1, got {self.n}")
        if len(self.q) != self.n or len(self.p) != self.n:
            raise ContractViolation("q and p must each have n entries")
        if not np.all(np.isfinite(self.coords)):
            raise DomainError("chart coordinates must be finite")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def coords(self) -> np.ndarray:
        return np.array((self.w, *self.q, *self.p), dtype=float)

    @classmethod
    def from_array(cls, x) -> "ChartPoint":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2 != 1:
            raise ContractViolation(f"expected a flat array of odd length, got shape {x.shape}")
        n = (x.size - 1) // 2
        return cls(n, float(x[0]), tuple(map(float, x[1 : n + 1])), tuple(map(float, x[n + 1 :])))

    def require_positive_p(self) -> None:
        if min(self.p) <= 0:
            raise DomainError(f"canonical frame needs p_a > 0, got p = {self.p}")


def as_coords(x) -> np.ndarray:
    """Coordinate array of a ChartPoint, or the array itself."""
    if isinstance(x, ChartPoint):
        return x.coords
    return np.asarray(x, dtype=float)


def dimension_parameter(x: np.ndarray) -> int:
    size = x.shape[-1]
    if size % 2 != 1:
        raise ContractViolation(f"chart arrays have odd length 2n+1, got {size}")
    return (size - 1) // 2
