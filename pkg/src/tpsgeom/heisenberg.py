"""The hyperbolic Heisenberg group R^2n x R and its para-contact metric structure.

Group law::

    (u', v', t') . (u, v, t) = (u' + u, v' + v, t' + t - sum_k (u'_k v_k - v'_k u_k))

The frame ``xi = 2 d/dtau``, ``U_k = d/du_k - 2 v_k d/dtau``,
``V_k = d/dv_k + 2 u_k d/dtau`` is left-invariant for this law when written in
the chart ``(tau, u, v)`` with ``tau = -2 t``; the chart is ordered like the
phase space, central coordinate first. The contact form is taken as the
one-form dual to the frame, ``Theta = dtau / 2 + sum_k (v_k du_k - u_k dv_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import axioms
from .connections import normality_residual
from .errors import ContractViolation
from .framecalc import FrameField, FrameGeometry, ParaContactStructure, coframe_of
from .numerics import StepScheme, jacobian
from .phase_space import exterior_derivative, top_form_coefficient

CENTRAL_SCALE = -2.0  # tau = CENTRAL_SCALE * t

# Every field here is polynomial in the chart, so truncation error is negligible
# and a wider step mainly cuts rounding noise in the nested differences.
HH_SCHEME = StepScheme(1e-2, 2)


@dataclass(frozen=True)
class GroupElement:
    n: int
    u: tuple[float, ...]
    v: tuple[float, ...]
    t: float

    def __post_init__(self):
        if len(self.u) != self.n or len(self.v) != self.n:
            raise ContractViolation("u and v must each have n entries")
        if not np.all(np.isfinite(self.as_array())):
            raise ContractViolation("group element coordinates must be finite")

    def as_array(self) -> np.ndarray:
        """Flat ``(u, v, t)`` array."""
        return np.array((*self.u, *self.v, self.t), dtype=float)

    @classmethod
    def from_array(cls, arr) -> "GroupElement":
        arr = np.asarray(arr, dtype=float)
        n = (arr.size - 1) // 2
        return cls(n, tuple(arr[:n]), tuple(arr[n : 2 * n]), float(arr[-1]))

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(n, (0.0,) * n, (0.0,) * n, 0.0)


def multiply_arrays(a, b) -> np.ndarray:
    """Group law on batched ``(..., 2n+1)`` arrays laid out as ``(u, v, t)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = (a.shape[-1] - 1) // 2
    ua, va, ta = a[..., :n], a[..., n : 2 * n], a[..., -1]
    ub, vb, tb = b[..., :n], b[..., n : 2 * n], b[..., -1]
    t = ta + tb - np.sum(ua * vb - va * ub, axis=-1)
    return np.concatenate([ua + ub, va + vb, t[..., None]], axis=-1)


def multiply(g1: GroupElement, g2: GroupElement) -> GroupElement:
    if g1.n != g2.n:
        raise ContractViolation(f"dimension mismatch: n={g1.n} vs n={g2.n}")
    return GroupElement.from_array(multiply_arrays(g1.as_array(), g2.as_array()))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.n, tuple(-x for x in g.u), tuple(-x for x in g.v), -g.t)


def to_chart(g) -> np.ndarray:
    """Chart coordinates ``(tau, u, v)`` of a group element or ``(u, v, t)`` array."""
    arr = g.as_array() if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    n = (arr.shape[-1] - 1) // 2
    return np.concatenate([CENTRAL_SCALE * arr[..., -1:], arr[..., : 2 * n]], axis=-1)


def from_chart(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.concatenate([x[..., 1:], x[..., :1] / CENTRAL_SCALE], axis=-1)


# --- coordinate-level fields on the chart (tau, u, v) -----------------------------


def _frame_vectors(x):
    x = np.asarray(x, dtype=float)
    n = (x.shape[-1] - 1) // 2
    u, v = x[..., 1 : n + 1], x[..., n + 1 :]
    E = np.zeros(x.shape + (x.shape[-1],))
    E[..., 0, 0] = 2.0
    k = np.arange(n)
    E[..., 1 + k, 1 + k] = 1.0
    E[..., 1 + k, 0] = -2.0 * v
    E[..., n + 1 + k, n + 1 + k] = 1.0
    E[..., n + 1 + k, 0] = 2.0 * u
    return E


def _contact_form(x):
    x = np.asarray(x, dtype=float)
    n = (x.shape[-1] - 1) // 2
    out = np.empty(x.shape)
    out[..., 0] = 0.5
    out[..., 1 : n + 1] = x[..., n + 1 :]
    out[..., n + 1 :] = -x[..., 1 : n + 1]
    return out


def _reeb(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    out[..., 0] = 2.0
    return out


def metric_diagonal(n: int) -> np.ndarray:
    return np.concatenate([[1.0], np.ones(n), -np.ones(n)])


def phi_table(n: int) -> np.ndarray:
    """Phi in the frame (xi, U_k, V_k): Phi xi = 0, Phi U_k = V_k, Phi V_k = U_k."""
    N = 2 * n + 1
    P = np.zeros((N, N))
    for k in range(1, n + 1):
        P[n + k, k] = 1.0
        P[k, n + k] = 1.0
    return P


def _metric(x):
    theta = coframe_of(_frame_vectors(x))
    d = metric_diagonal((np.asarray(x).shape[-1] - 1) // 2)
    return np.einsum("...im,i,...in->...mn", theta, d, theta)


def _phi(x):
    E = _frame_vectors(x)
    P = phi_table((np.asarray(x).shape[-1] - 1) // 2)
    return np.einsum("...km,kj,...jn->...mn", E, P, coframe_of(E))


@lru_cache(maxsize=None)
def hh_frame(n: int) -> FrameField:
    return FrameField("hh_canonical", n, _frame_vectors)


@lru_cache(maxsize=None)
def hh_structure(n: int) -> ParaContactStructure:
    if n < 1:
        raise ContractViolation("n must be >= 1")
    return ParaContactStructure("hyperbolic_heisenberg", n, _metric, _contact_form, _reeb, hh_frame(n), phi=_phi, phi_table=phi_table(n))


def frame_at(g) -> np.ndarray:
    """Chart components of (xi, U_1..U_n, V_1..V_n) at ``g`` (rows)."""
    return _frame_vectors(to_chart(g))


def contact_form_hh(g) -> np.ndarray:
    """Chart components of Theta over (dtau, du_k, dv_k)."""
    return _contact_form(to_chart(g))


def sample_group_array(n: int, count: int, seed: int, radius: float = 2.0) -> np.ndarray:
    """Seeded ``(count, 2n+1)`` array of ``(u, v, t)`` group elements."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, size=(count, 2 * n + 1))


# --- checks ---------------------------------------------------------------------


def group_axiom_residuals(n: int, count: int = 1000, seed: int = 0):
    """Max deviations of (identity, inverse, associativity) on random triples."""
    a, b, c = (sample_group_array(n, count, seed + k) for k in range(3))
    e = np.zeros_like(a)
    ident = max(np.max(np.abs(multiply_arrays(e, a) - a)), np.max(np.abs(multiply_arrays(a, e) - a)))
    inv = -a
    inverse_res = max(np.max(np.abs(multiply_arrays(inv, a))), np.max(np.abs(multiply_arrays(a, inv))))
    assoc = np.max(np.abs(multiply_arrays(multiply_arrays(a, b), c) - multiply_arrays(a, multiply_arrays(b, c))))
    return float(ident), float(inverse_res), float(assoc)


def left_translation_jacobian(g: np.ndarray, scheme: StepScheme = StepScheme(1e-3, 2)) -> np.ndarray:
    """Chart Jacobian of h -> g . h at the identity: ``J[..., nu, mu] = d (g.h)^mu / d h^nu``."""
    g = np.asarray(g, dtype=float)

    def translate(x):
        gg = np.broadcast_to(g.reshape(g.shape[:-1] + (1,) * (x.ndim - g.ndim) + g.shape[-1:]), x.shape)
        return to_chart(multiply_arrays(gg, from_chart(x)))

    return jacobian(translate, np.zeros(g.shape), scheme)


def left_invariance_residual(g: np.ndarray) -> float:
    """max |dL_g(e_i(identity)) - e_i(g)| over frame vectors and elements."""
    g = np.asarray(g, dtype=float)
    J = left_translation_jacobian(g)
    pushed = np.einsum("im,...mn->...in", _frame_vectors(np.zeros(g.shape[-1])), J)
    return float(np.max(np.abs(pushed - _frame_vectors(to_chart(g)))))


def contact_volume_coefficient(g) -> float:
    """Coefficient of Theta ^ (d Theta)^n against dtau ^ du_1 ^ dv_1 ^ ... ^ du_n ^ dv_n."""
    x = to_chart(g)
    n = (x.size - 1) // 2
    order = [0]
    for k in range(1, n + 1):
        order += [k, n + k]
    return top_form_coefficient(_contact_form(x), exterior_derivative(_contact_form, x), np.eye(x.size)[order])


@dataclass
class HHReport:
    """Residuals of the structure checks on the hyperbolic Heisenberg group."""

    n: int
    phi_table_residual: float
    metric_residual: float
    signature_mismatches: float
    reeb_residual: float
    phi_squared_residual: float
    compatibility_residual: float
    association_sign: float
    association_residual: float
    nijenhuis_residual: float
    nijenhuis_horizontal: float
    canonical_curvature: float
    torsion_restricted: float | None

    def residuals(self) -> dict[str, float]:
        out = {k: v for k, v in vars(self).items() if k not in ("n", "association_sign") and v is not None}
        return out


def horizontal_torsion_residual(geom: FrameGeometry, X) -> float:
    """max of |T(xi, X)| and the horizontal part of T(X, Y) for the canonical connection."""
    T = geom.torsion(geom.canonical(X), X)
    xi, eta = geom.xi(X), geom.eta(X)
    along_xi = np.einsum("...i,...kij->...kj", xi, T)
    vertical = np.einsum("...m,...mij->...ij", eta, T)
    horizontal = T - xi[..., :, None, None] * vertical[..., None, :, :]
    return float(max(np.max(np.abs(along_xi)), np.max(np.abs(horizontal))))


def structure_checks(
    n: int, points: np.ndarray, scheme: StepScheme = HH_SCHEME, structure: ParaContactStructure | None = None
) -> HHReport:
    """Run the para-contact machinery on the group at chart points ``points``.

    ``structure`` replaces the group's own structure, e.g. by a perturbed copy.
    """
    s = structure or hh_structure(n)
    geom = FrameGeometry(s, scheme=scheme)
    X = np.asarray(points, dtype=float)
    P = geom.phi_frame(X)
    sign, assoc = axioms.association(geom, X)
    normal, horizontal = normality_residual(X, s, scheme)
    curv = geom.riemann(geom.canonical, X)
    return HHReport(
        n=n,
        phi_table_residual=float(np.max(np.abs(P - phi_table(n)))),
        metric_residual=float(np.max(np.abs(geom.metric(X) - np.diag(metric_diagonal(n))))),
        signature_mismatches=axioms.signature_residual(geom, X, (n + 1, n, 0)),
        reeb_residual=max(axioms.reeb_residuals(geom, X)),
        phi_squared_residual=axioms.phi_squared_residual(geom, X),
        compatibility_residual=axioms.compatibility_residual(geom, X),
        association_sign=sign,
        association_residual=assoc,
        nijenhuis_residual=normal,
        nijenhuis_horizontal=horizontal,
        canonical_curvature=float(np.max(np.abs(curv))),
        torsion_restricted=horizontal_torsion_residual(geom, X) if n == 1 else None,
    )
