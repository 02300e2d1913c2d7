"""Gibbs families, their moments, and the Fisher-Rao geometry they induce.

A model is an exponential family ``rho(x; q) = exp(q^a F_a(x) - w(q))`` on an
explicit sample space, with ``w`` the log-partition function (free entropy).
Everything here is computed from the sample space by summation or quadrature;
closed forms for the built-in models live in :data:`CLOSED_FORMS` and serve as
oracles only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from .chart import ChartPoint
from .errors import ConfigError, ContractViolation, DomainError
from .numerics import (
    NESTED_SCHEME,
    DiscreteSpace,
    IntervalSpace,
    QuadratureSpec,
    StepScheme,
    hessian,
    integrate,
    jacobian,
)
from .phase_space import eta_coords, metric_coords

OBSERVABLE_CATALOG: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "x": lambda x: x,
    "x^2": lambda x: x**2,
    "x^3": lambda x: x**3,
    "x^4": lambda x: x**4,
    "|x|": np.abs,
}


@dataclass(frozen=True)
class QDomain:
    """Open box of admissible Lagrange multipliers (bounds may be infinite)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ContractViolation("q-domain bounds differ in length")
        if any(not a < b for a, b in zip(self.lo, self.hi)):
            raise ContractViolation("q-domain box is empty")

    def contains(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(np.isfinite(q)) and np.all(q > self.lo) and np.all(q < self.hi))


@dataclass(frozen=True)
class GibbsModel:
    name: str
    space: DiscreteSpace | IntervalSpace
    observables: tuple[str, ...]
    q_domain: QDomain
    quadrature: QuadratureSpec | None = None
    grid_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if len(self.observables) < 1:
            raise ContractViolation("a model needs at least one observable")
        unknown = [o for o in self.observables if o not in OBSERVABLE_CATALOG]
        if unknown:
            raise ConfigError(f"unknown observables {unknown}; catalog: {sorted(OBSERVABLE_CATALOG)}")
        if len(self.q_domain.lo) != len(self.observables):
            raise ContractViolation("q-domain dimension differs from the number of observables")

    @property
    def n(self) -> int:
        return len(self.observables)

    def features(self, x) -> np.ndarray:
        """``F[..., a]`` for sample points ``x``."""
        x = np.asarray(x, dtype=float)
        return np.stack([OBSERVABLE_CATALOG[o](x) for o in self.observables], axis=-1)

    def window(self, q) -> tuple[float, float]:
        """Centre and width of the dominant region, used to place the quadrature window.

        If the exponent has a negative x^2 coefficient the density is Gaussian
        in shape and the window follows its mean and standard deviation.
        """
        a = sum(v for k, v in zip(self.observables, q) if k == "x^2")
        if a < 0:
            b = sum(v for k, v in zip(self.observables, q) if k == "x")
            return -b / (2 * a), math.sqrt(-1.0 / (2 * a))
        return 0.0, 1.0

    def grid(self, count: int = 21) -> np.ndarray:
        """``(count, n)`` evenly spaced points along the diagonal of the grid box."""
        if self.grid_box is None:
            raise ContractViolation(f"model {self.name!r} has no grid box")
        lo, hi = (np.asarray(b, dtype=float) for b in self.grid_box)
        t = np.linspace(0.0, 1.0, count)[:, None]
        return lo + t * (hi - lo)


# --- built-in models --------------------------------------------------------------

_INF = math.inf


def two_level() -> GibbsModel:
    return GibbsModel("two_level", DiscreteSpace((-1.0, 1.0)), ("x",), QDomain((-_INF,), (_INF,)), grid_box=((-2.0,), (2.0,)))


def gaussian_quadratic() -> GibbsModel:
    return GibbsModel("gaussian_quadratic", IntervalSpace(), ("x^2",), QDomain((-_INF,), (0.0,)), grid_box=((-3.0,), (-0.2,)))


def gaussian_two_param() -> GibbsModel:
    return GibbsModel(
        "gaussian_two_param",
        IntervalSpace(),
        ("x", "x^2"),
        QDomain((-_INF, -_INF), (_INF, 0.0)),
        grid_box=((-1.0, -2.5), (1.0, -0.5)),
    )


BUILTIN_MODELS: dict[str, Callable[[], GibbsModel]] = {
    "two_level": two_level,
    "gaussian_quadratic": gaussian_quadratic,
    "gaussian_two_param": gaussian_two_param,
}

CLOSED_FORMS: dict[str, Callable[[np.ndarray], float]] = {
    "two_level": lambda q: math.log(2 * math.cosh(q[0])),
    "gaussian_quadratic": lambda q: 0.5 * math.log(math.pi / -q[0]),
    "gaussian_two_param": lambda q: 0.5 * math.log(math.pi / -q[1]) + q[0] ** 2 / (-4 * q[1]),
}


def get_model(name: str) -> GibbsModel:
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; built-ins: {sorted(BUILTIN_MODELS)}") from None


def _bound(v) -> float:
    return float(v)  # accepts "inf" / "-inf" strings as well as numbers


def model_from_dict(cfg: dict) -> GibbsModel:
    """Build a model from a declarative mapping (the YAML schema)."""
    try:
        name = str(cfg["name"])
        sp = cfg["space"]
        if sp["type"] == "discrete":
            weights = sp.get("weights")
            space = DiscreteSpace(tuple(float(p) for p in sp["points"]), None if weights is None else tuple(float(w) for w in weights))
        elif sp["type"] == "interval":
            space = IntervalSpace(_bound(sp.get("lo", "-inf")), _bound(sp.get("hi", "inf")))
        else:
            raise ConfigError(f"unknown space type {sp['type']!r}")
        observables = tuple(cfg["observables"])
        dom = cfg.get("q_domain", {})
        n = len(observables)
        lo = tuple(_bound(v) for v in dom.get("lo", ["-inf"] * n))
        hi = tuple(_bound(v) for v in dom.get("hi", ["inf"] * n))
        quad = QuadratureSpec(**cfg["quadrature"]) if "quadrature" in cfg else None
        grid = cfg.get("grid")
        grid_box = None if grid is None else (tuple(map(float, grid["lo"])), tuple(map(float, grid["hi"])))
        return GibbsModel(name, space, observables, QDomain(lo, hi), quad, grid_box)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model config: {exc}") from exc
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from exc


def load_model(path: str | Path) -> GibbsModel:
    with open(path) as fh:
        return model_from_dict(yaml.safe_load(fh))


# --- moments ------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlPoint:
    w: float
    q: tuple[float, ...]


@dataclass(frozen=True)
class EquilibriumState:
    q: tuple[float, ...]
    w: float
    p: tuple[float, ...]
    cov: np.ndarray = field(repr=False)


def _checked_q(model: GibbsModel, q) -> np.ndarray:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.shape != (model.n,):
        raise ContractViolation(f"q must have {model.n} components, got shape {q.shape}")
    if not model.q_domain.contains(q):
        raise DomainError(f"q = {q.tolist()} is outside the domain of {model.name!r}")
    return q


def _integrate(model: GibbsModel, q, f):
    center, scale = model.window(q)
    return integrate(model.space, f, model.quadrature, center=center, scale=scale)


def _shift(model: GibbsModel, q) -> float:
    """A reference value of q.F near the peak, subtracted before exponentiating."""
    if isinstance(model.space, DiscreteSpace):
        return float(np.max(model.features(model.space.points) @ q))
    center, _ = model.window(q)
    return float(model.features(center) @ q)


def log_partition(model: GibbsModel, q) -> float:
    """w(q) = ln sum/integral of exp(q.F)."""
    q = _checked_q(model, q)
    s = _shift(model, q)
    z = _integrate(model, q, lambda x: np.exp(model.features(x) @ q - s))
    if not z > 0:
        raise DomainError("partition function is not positive")
    return s + math.log(z)


def _density(model: GibbsModel, q, w):
    return lambda x: np.exp(model.features(x) @ q - w)


def mean_observables(model: GibbsModel, q) -> np.ndarray:
    q = _checked_q(model, q)
    rho = _density(model, q, log_partition(model, q))
    return np.atleast_1d(_integrate(model, q, lambda x: rho(x)[:, None] * model.features(x)))


def covariance_matrix(model: GibbsModel, q) -> np.ndarray:
    q = _checked_q(model, q)
    rho = _density(model, q, log_partition(model, q))
    p = mean_observables(model, q)

    def f(x):
        d = model.features(x) - p
        return rho(x)[:, None, None] * d[:, :, None] * d[:, None, :]

    c = np.atleast_2d(_integrate(model, q, f))
    return 0.5 * (c + c.T)


def equilibrium_state(model: GibbsModel, q) -> EquilibriumState:
    q = _checked_q(model, q)
    return EquilibriumState(tuple(q), log_partition(model, q), tuple(mean_observables(model, q)), covariance_matrix(model, q))


def _batched(fn, width: int):
    """Lift a single-point function of q to batched ``(..., width)`` inputs."""

    def lifted(Q):
        Q = np.asarray(Q, dtype=float)
        flat = Q.reshape(-1, width)
        out = np.array([fn(row) for row in flat])
        return out.reshape(Q.shape[:-1] + out.shape[1:])

    return lifted


def log_partition_gradient(model: GibbsModel, q, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    """Finite-difference gradient of w, the independent route to p."""
    q = _checked_q(model, q)
    return jacobian(_batched(lambda r: log_partition(model, r), model.n), q, scheme)


def log_partition_hessian(model: GibbsModel, q) -> np.ndarray:
    q = _checked_q(model, q)
    return hessian(lambda r: log_partition(model, r), q)


# --- Fisher-Rao and entropy -----------------------------------------------------------


def fisher_rao_control_metric(model: GibbsModel, q) -> np.ndarray:
    """Second-moment metric on the control manifold in (w, q^a) coordinates."""
    p = mean_observables(model, q)
    c = covariance_matrix(model, q)
    n = model.n
    G = np.empty((n + 1, n + 1))
    G[0, 0] = 1.0
    G[0, 1:] = G[1:, 0] = -p
    G[1:, 1:] = c + np.outer(p, p)
    return G


@dataclass(frozen=True)
class EntropyDifferential:
    """Moments of the microscopic entropy change ds = dw - F_a dq^a over (dw, dq^a)."""

    first_moment: np.ndarray
    variance_form: np.ndarray
    second_moment: np.ndarray

    def moment_identity_residual(self) -> float:
        n = len(self.first_moment) - 1
        var = np.zeros((n + 1, n + 1))
        var[1:, 1:] = self.variance_form
        return float(np.max(np.abs(self.second_moment - var - np.outer(self.first_moment, self.first_moment))))


def entropy_differential(model: GibbsModel, q) -> EntropyDifferential:
    """First moment, variance and second moment of ds, each integrated directly."""
    q = _checked_q(model, q)
    rho = _density(model, q, log_partition(model, q))

    def ds(x):
        F = model.features(x)
        return np.concatenate([np.ones(F.shape[:-1] + (1,)), -F], axis=-1)

    first = np.atleast_1d(_integrate(model, q, lambda x: rho(x)[:, None] * ds(x)))
    second = np.atleast_2d(_integrate(model, q, lambda x: rho(x)[:, None, None] * ds(x)[:, :, None] * ds(x)[:, None, :]))

    def centred(x):
        d = ds(x)[:, 1:] - first[1:]
        return rho(x)[:, None, None] * d[:, :, None] * d[:, None, :]

    var = np.atleast_2d(_integrate(model, q, centred))
    return EntropyDifferential(first, 0.5 * (var + var.T), 0.5 * (second + second.T))


def relative_entropy(model: GibbsModel, q_from, q_to, method: str = "integral") -> float:
    """Kullback-Leibler divergence of the ``q_to`` member from the reference ``q_from`` member.

    ``method="integral"`` integrates rho_0 ln(rho_0 / rho) directly;
    ``method="bregman"`` uses w(q_to) - w(q_from) - (q_to - q_from).p(q_from).
    Both are non-negative and vanish only when the arguments coincide.
    """
    q0 = _checked_q(model, q_from)
    q1 = _checked_q(model, q_to)
    w0, w1 = log_partition(model, q0), log_partition(model, q1)
    if method == "bregman":
        return w1 - w0 - float((q1 - q0) @ mean_observables(model, q0))
    if method != "integral":
        raise ContractViolation(f"unknown method {method!r}")
    rho0 = _density(model, q0, w0)
    return float(_integrate(model, q0, lambda x: rho0(x) * (model.features(x) @ (q0 - q1) - w0 + w1)))


def kl_quadratic_residual(model: GibbsModel, q0, delta, method: str = "bregman"):
    """(kl, quadratic, residual) for the second-order expansion of the divergence."""
    q0 = _checked_q(model, q0)
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if not np.any(delta):
        return 0.0, 0.0, 0.0
    kl = relative_entropy(model, q0, q0 + delta, method)
    quad = 0.5 * float(delta @ covariance_matrix(model, q0) @ delta)
    return kl, quad, kl - quad


def kl_symmetric_residual(model: GibbsModel, q0, delta, method: str = "bregman") -> float:
    """kl(q0, q0 + d) + kl(q0, q0 - d) - d.c(q0).d, which has no odd-order terms."""
    q0 = _checked_q(model, q0)
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    c = covariance_matrix(model, q0)
    plus = relative_entropy(model, q0, q0 + delta, method)
    minus = relative_entropy(model, q0, q0 - delta, method)
    return plus + minus - float(delta @ c @ delta)


def observed_order(deltas, residuals) -> float:
    """Least-squares slope of log|residual| against log(delta)."""
    return float(np.polyfit(np.log(np.asarray(deltas, dtype=float)), np.log(np.abs(np.asarray(residuals, dtype=float))), 1)[0])


# --- embeddings and pullbacks -----------------------------------------------------------


def legendre_embed(model: GibbsModel, q) -> ChartPoint:
    """The equilibrium point (w(q), q, p(q)) in the phase space."""
    q = _checked_q(model, q)
    return ChartPoint(model.n, log_partition(model, q), tuple(q), tuple(mean_observables(model, q)))


def legendre_embedding(model: GibbsModel) -> Callable[[np.ndarray], np.ndarray]:
    """Batched map q -> (w(q), q, p(q))."""
    return _batched(lambda q: np.concatenate([[log_partition(model, q)], q, mean_observables(model, q)]), model.n)


def control_embedding(model: GibbsModel) -> Callable[[np.ndarray], np.ndarray]:
    """Batched map (w, q) -> (w, q, p(q)) from the control manifold."""
    n = model.n
    return _batched(lambda z: np.concatenate([z, mean_observables(model, z[1:])]), n + 1)


def _pullback(emb, z, scheme):
    J = jacobian(emb, z, scheme)  # J[A, mu] = d emb^mu / d z^A
    X = emb(z)
    return J, X


def pullback_metric(emb, z, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    """emb*(G) through a finite-difference tangent map."""
    J, X = _pullback(emb, np.asarray(z, dtype=float), scheme)
    return J @ metric_coords(X) @ J.T


def pullback_contact_form(emb, z, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    J, X = _pullback(emb, np.asarray(z, dtype=float), scheme)
    return J @ eta_coords(X)


def control_pullbacks(model: GibbsModel, q, w: float = 0.0):
    """(pulled-back metric, pulled-back contact form) through (w, q) -> (w, q, p(q))."""
    z = np.concatenate([[w], _checked_q(model, q)])
    emb = control_embedding(model)
    return pullback_metric(emb, z), pullback_contact_form(emb, z)


def legendre_pullbacks(model: GibbsModel, q):
    """(pulled-back metric, pulled-back contact form) through q -> (w(q), q, p(q))."""
    q = _checked_q(model, q)
    emb = legendre_embedding(model)
    return pullback_metric(emb, q), pullback_contact_form(emb, q)


@dataclass(frozen=True)
class InducedMetric:
    """Hessian metric on the equilibrium manifold.

    ``ruppeiner_sign`` is the factor relating it to Ruppeiner's fluctuation
    metric when w is read as an entropy-like potential; no separate
    computation is done for that metric.
    """

    matrix: np.ndarray
    ruppeiner_sign: int = -1


def induced_metric(model: GibbsModel, q) -> InducedMetric:
    return InducedMetric(covariance_matrix(model, q))


def invertibility_check(model: GibbsModel, q, tol: float = 1e-10) -> tuple[float, bool]:
    """Determinant of the Hessian of w and whether it is safely non-zero."""
    det = float(np.linalg.det(covariance_matrix(model, q)))
    return det, abs(det) > tol
