"""Numerical substrate: finite differences, quadrature, signature, sampling.

Every field handed to the differentiators is *batched*: it accepts an array of
shape ``(..., N)`` and returns ``(..., *out)``. The differentiators exploit
this to evaluate all displaced points in a single call, which is what makes the
nested differentiation in the curvature code affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chart import ChartPoint, as_coords
from .errors import ContractViolation, DomainError, EvaluationError, TruncationError


@dataclass(frozen=True)
class StepScheme:
    """Central differences refined by Richardson extrapolation.

    ``base_step`` is scaled by ``max(1, |x_k|)`` per coordinate. With
    ``richardson_levels = L`` the steps ``h, h/2, ..., h/2^(L-1)`` are combined
    and the truncation error is O(h^(2L)).
    """

    base_step: float = 1e-5
    richardson_levels: int = 2

    def __post_init__(self):
        if not self.base_step > 0:
            raise ContractViolation(f"base_step must be positive, got {self.base_step}")
        if not 1 <= self.richardson_levels <= 4:
            raise ContractViolation(f"richardson_levels must be in [1, 4], got {self.richardson_levels}")


DEFAULT_SCHEME = StepScheme()
# Used wherever a finite-difference result is differentiated again (curvature,
# Nijenhuis, parallelism). Larger steps keep round-off of the inner derivative
# from being amplified; the extra level keeps truncation below 1e-12.
NESTED_SCHEME = StepScheme(base_step=1e-3, richardson_levels=3)


@dataclass(frozen=True)
class SignatureCount:
    n_pos: int
    n_neg: int
    n_zero: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_pos, self.n_neg, self.n_zero)


def _richardson(estimates: Sequence[np.ndarray]) -> np.ndarray:
    table = list(estimates)
    for j in range(1, len(table)):
        factor = 4.0**j - 1.0
        table = [table[k] + (table[k] - table[k - 1]) / factor for k in range(1, len(table))]
    return table[-1]


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"non-finite value while evaluating {what}")


def jacobian(f: Callable[[np.ndarray], np.ndarray], x, scheme: StepScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Partial derivatives of a batched field along every coordinate.

    Returns an array of shape ``(..., N, *out)`` whose axis after the batch axes
    is the coordinate direction of differentiation.
    """
    x = as_coords(x)
    dim = x.shape[-1]
    levels = scheme.richardson_levels
    h0 = scheme.base_step * np.maximum(1.0, np.abs(x))  # (..., N)
    shrink = 0.5 ** np.arange(levels)  # (L,)
    h = h0[..., None, :] * shrink[:, None]  # (..., L, N)
    eye = np.eye(dim)
    offsets = h[..., :, :, None] * eye  # (..., L, N dir, N coord)
    signs = np.array([1.0, -1.0])[:, None, None]
    pts = x[..., None, None, None, :] + signs * offsets[..., :, None, :, :]  # (..., L, 2, N, N)
    vals = np.asarray(f(pts), dtype=float)
    _check_finite(vals, "a differentiated field")
    batch = x.ndim - 1
    out_ndim = vals.ndim - batch - 3
    diff = np.take(vals, 0, axis=batch + 1) - np.take(vals, 1, axis=batch + 1)
    estimates = diff / (2.0 * h).reshape(h.shape + (1,) * out_ndim)  # (..., L, N, *out)
    return _richardson([np.take(estimates, k, axis=batch) for k in range(levels)])


def directional_derivative(f: Callable[[np.ndarray], np.ndarray], x, v, scheme: StepScheme = DEFAULT_SCHEME):
    """Derivative of ``f`` at ``x`` along a coordinate direction.

    ``v`` is either a coordinate index or a vector of coordinate components.
    """
    x = as_coords(x)
    if isinstance(v, (int, np.integer)):
        direction = np.zeros(x.shape[-1])
        direction[int(v)] = 1.0
    else:
        direction = np.asarray(v, dtype=float)
        if direction.shape != x.shape[-1:]:
            raise ContractViolation(f"direction has shape {direction.shape}, expected {x.shape[-1:]}")
    support = np.abs(direction) > 0
    if not np.any(support):
        return 0.0 * np.asarray(f(x), dtype=float)
    scale = np.max(np.where(support, np.maximum(1.0, np.abs(x)), 0.0), axis=-1)
    h0 = scheme.base_step * scale
    estimates = []
    for k in range(scheme.richardson_levels):
        h = np.asarray(h0 * 0.5**k)
        hv = h[..., None] * direction
        fp = np.asarray(f(x + hv), dtype=float)
        fm = np.asarray(f(x - hv), dtype=float)
        _check_finite(fp, "f")
        _check_finite(fm, "f")
        estimates.append((fp - fm) / (2.0 * h.reshape(h.shape + (1,) * (fp.ndim - h.ndim))))
    result = _richardson(estimates)
    return float(result) if np.ndim(result) == 0 else result


def gradient(f: Callable[[np.ndarray], float], x, scheme: StepScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Gradient of a scalar function of a flat parameter vector (unbatched ``f``)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([directional_derivative(lambda y: _scalar_call(f, y), x, k, scheme) for k in range(x.size)])


def _scalar_call(f, y):
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        return f(y)
    return np.array([f(row) for row in y.reshape(-1, y.shape[-1])]).reshape(y.shape[:-1])


def hessian(f: Callable[[np.ndarray], float], x, scheme: StepScheme = StepScheme(1e-3, 3)) -> np.ndarray:
    """Hessian of a scalar function by four-point central differences.

    The second-difference stencil has an even error expansion, so the same
    Richardson weights as for first derivatives apply.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = x.size
    h0 = scheme.base_step * np.maximum(1.0, np.abs(x))
    estimates = []
    for k in range(scheme.richardson_levels):
        h = h0 * 0.5**k
        H = np.empty((m, m))
        for a in range(m):
            for b in range(a, m):
                ea = np.zeros(m)
                eb = np.zeros(m)
                ea[a] = h[a]
                eb[b] = h[b]
                val = (f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)) / (4.0 * h[a] * h[b])
                H[a, b] = H[b, a] = val
        _check_finite(H, "f")
        estimates.append(H)
    return _richardson(estimates)


def matrix_signature(M, zero_tol: float = 1e-9) -> SignatureCount:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {M.shape}")
    if M.size and np.max(np.abs(M - M.T)) > zero_tol:
        raise ContractViolation("matrix is not symmetric within zero_tol")
    eig = np.linalg.eigvalsh(0.5 * (M + M.T))
    n_pos = int(np.sum(eig > zero_tol))
    n_neg = int(np.sum(eig < -zero_tol))
    return SignatureCount(n_pos, n_neg, len(eig) - n_pos - n_neg)


# --- quadrature -------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """How integrals over a sample space are evaluated.

    ``truncation`` is the half-width of the window used for unbounded
    domains, in units of the space's scale (standard-deviation equivalents for
    Gaussian-type weights). ``node_count`` is the Gauss-Legendre rule used on
    every panel of the adaptive composite rule.
    """

    kind: str = "adaptive_interval"
    truncation: float = 12.0
    node_count: int = 10
    rel_tol: float = 1e-13
    abs_tol: float = 1e-300
    edge_tol: float = 1e-12
    max_panels: int = 4096

    def __post_init__(self):
        if self.kind not in ("closed_form", "adaptive_interval", "discrete_sum"):
            raise ContractViolation(f"unknown quadrature kind {self.kind!r}")
        if not self.truncation > 0:
            raise ContractViolation("truncation must be positive")
        if self.kind == "adaptive_interval" and self.node_count < 2:
            raise ContractViolation("interval rules need node_count >= 2")


@dataclass(frozen=True)
class DiscreteSpace:
    points: tuple[float, ...]
    weights: tuple[float, ...] | None = None

    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(len(self.points))
        if len(self.weights) != len(self.points):
            raise ContractViolation("weights and points differ in length")
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class IntervalSpace:
    """A real interval, possibly unbounded on either side."""

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ContractViolation(f"empty interval [{self.lo}, {self.hi}]")


def _gauss_panel(f, a, b, nodes, weights):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.asarray(f(mid + half * nodes), dtype=float)
    _check_finite(vals, "integrand")
    return half * np.tensordot(weights, vals, axes=(0, 0))


def _adaptive(f, a, b, quad: QuadratureSpec):
    nodes, weights = np.polynomial.legendre.leggauss(quad.node_count)
    width = b - a
    coarse = _gauss_panel(f, a, b, nodes, weights)
    total = np.zeros_like(coarse)
    stack = [(a, b, coarse)]
    panels = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gauss_panel(f, lo, mid, nodes, weights)
        right = _gauss_panel(f, mid, hi, nodes, weights)
        refined = left + right
        panels += 1
        err = np.max(np.abs(refined - whole))
        scale = max(np.max(np.abs(coarse)), np.max(np.abs(refined)))
        budget = max(quad.rel_tol * scale, quad.abs_tol) * (hi - lo) / width
        if err <= budget or panels >= quad.max_panels:
            total = total + refined
        else:
            stack.append((mid, hi, right))
            stack.append((lo, mid, left))
    return total


def integrate(
    space,
    f: Callable[[np.ndarray], np.ndarray],
    quad: QuadratureSpec | None = None,
    center: float = 0.0,
    scale: float = 1.0,
):
    """Integral of ``f`` over a sample space.

    ``f`` is vectorised: it maps an array of sample points to an array whose
    first axis runs over those points (extra trailing axes integrate
    componentwise). Discrete spaces give an exact weighted sum. Unbounded ends
    of an interval are cut at ``center +/- truncation * scale``; if the
    integrand is not negligible there, :class:`TruncationError` is raised.
    """
    if isinstance(space, DiscreteSpace):
        if quad is not None and quad.kind != "discrete_sum":
            raise ContractViolation(f"{quad.kind} rule given for a discrete space")
        vals = np.asarray(f(np.asarray(space.points, dtype=float)), dtype=float)
        _check_finite(vals, "integrand")
        return np.tensordot(space.weight_array(), vals, axes=(0, 0))
    if not isinstance(space, IntervalSpace):
        raise ContractViolation(f"unsupported sample space {space!r}")
    quad = quad or QuadratureSpec()
    if quad.kind != "adaptive_interval":
        raise ContractViolation(f"{quad.kind} rule given for an interval space")
    half = quad.truncation * scale
    lo = space.lo if math.isfinite(space.lo) else center - half
    hi = space.hi if math.isfinite(space.hi) else center + half
    if not lo < hi:
        raise DomainError(f"integration window [{lo}, {hi}] is empty")
    result = _adaptive(f, lo, hi, quad)
    cut = [e for e, finite in ((lo, math.isfinite(space.lo)), (hi, math.isfinite(space.hi))) if not finite]
    if cut:
        edge = np.max(np.abs(np.asarray(f(np.array(cut)), dtype=float)))
        if edge * scale > quad.edge_tol * max(1.0, float(np.max(np.abs(result)))):
            raise TruncationError(f"integrand is {edge:.3g} at the window edge {cut}")
    return float(result) if np.ndim(result) == 0 else result


# --- sampling ---------------------------------------------------------------


def sample_chart_array(
    n: int,
    count: int,
    seed: int,
    p_range: tuple[float, float] = (0.2, 5.0),
    q_range: tuple[float, float] = (-2.0, 2.0),
    w_range: tuple[float, float] = (-2.0, 2.0),
) -> np.ndarray:
    """Seeded uniform chart points as a ``(count, 2n+1)`` array."""
    if n < 1 or count < 0:
        raise ContractViolation("need n >= 1 and count >= 0")
    if p_range[0] <= 0:
        raise DomainError(f"p_range lower bound must be positive, got {p_range[0]}")
    for lo, hi in (p_range, q_range, w_range):
        if lo > hi:
            raise ContractViolation(f"bad range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    w = rng.uniform(*w_range, size=(count, 1))
    q = rng.uniform(*q_range, size=(count, n))
    p = rng.uniform(*p_range, size=(count, n))
    return np.concatenate([w, q, p], axis=1)


def sample_chart_points(n: int, count: int, seed: int, p_range=(0.2, 5.0), q_range=(-2.0, 2.0), w_range=(-2.0, 2.0)) -> list[ChartPoint]:
    arr = sample_chart_array(n, count, seed, p_range, q_range, w_range)
    return [ChartPoint.from_array(row) for row in arr]
