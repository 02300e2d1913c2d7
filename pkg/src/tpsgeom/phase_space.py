"""The thermodynamic phase space in Darboux coordinates (w, q^a, p_a).

Contact form ``eta = dw - p_a dq^a``, metric
``G = eta (x) eta + (dq (x) dp + dp (x) dq) / 2``, Reeb field ``d/dw``. The
canonical frame (xi, e+_a, e-_a) and its orthonormal dual exist only where
every p_a > 0.

Exterior derivatives use the full convention
``d alpha(X, Y) = X alpha(Y) - Y alpha(X) - alpha([X, Y])`` and wedges of
one-forms are ``alpha ^ beta = alpha (x) beta - beta (x) alpha``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chart import ChartPoint, as_coords, dimension_parameter
from .errors import ContractViolation
from .framecalc import (
    CoframeField,
    FrameField,
    FrameGeometry,
    ParaContactStructure,
    bracket_rows,
    coframe_of,
)
from .numerics import DEFAULT_SCHEME, NESTED_SCHEME, StepScheme, jacobian

FRAME_KINDS = ("coordinate", "heisenberg", "canonical")


def _split(x):
    n = dimension_parameter(x)
    return n, x[..., 1 : n + 1], x[..., n + 1 :]


# --- coordinate-level fields -------------------------------------------------


def eta_coords(x):
    x = np.asarray(x, dtype=float)
    n, _, p = _split(x)
    out = np.zeros(x.shape)
    out[..., 0] = 1.0
    out[..., 1 : n + 1] = -p
    return out


def reeb_coords(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    out[..., 0] = 1.0
    return out


def metric_coords(x):
    x = np.asarray(x, dtype=float)
    n, _, _ = _split(x)
    eta = eta_coords(x)
    G = eta[..., :, None] * eta[..., None, :]
    idx = np.arange(n)
    G[..., 1 + idx, n + 1 + idx] += 0.5
    G[..., n + 1 + idx, 1 + idx] += 0.5
    return G


# --- frames ------------------------------------------------------------------


def _coordinate_vectors(x):
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(np.eye(x.shape[-1]), x.shape + (x.shape[-1],)).copy()


def _heisenberg_vectors(x):
    """Rows (xi, Q_a = d/dq^a + p_a d/dw, P^a = d/dp_a)."""
    x = np.asarray(x, dtype=float)
    n, _, p = _split(x)
    E = _coordinate_vectors(x)
    E[..., 1 : n + 1, 0] = p
    return E


def _canonical_vectors(x):
    """Rows (xi, e+_a, e-_a) with e+-_a = sqrt(p_a) (Q_a / p_a +- P^a)."""
    x = np.asarray(x, dtype=float)
    n, _, p = _split(x)
    s = np.sqrt(p)
    E = np.zeros(x.shape + (x.shape[-1],))
    E[..., 0, 0] = 1.0
    idx = np.arange(n)
    for sign, rows in ((1.0, 1 + idx), (-1.0, n + 1 + idx)):
        E[..., rows, 0] = s
        E[..., rows, 1 + idx] = 1.0 / s
        E[..., rows, n + 1 + idx] = sign * s
    return E


def _orthonormal_covectors(x):
    """Rows (eta, theta+^a, theta-^a), theta+-^a = sqrt(p_a)/(2 p_a) (p_a dq^a +- dp_a)."""
    x = np.asarray(x, dtype=float)
    n, _, p = _split(x)
    s = np.sqrt(p)
    T = np.zeros(x.shape + (x.shape[-1],))
    T[..., 0, :] = eta_coords(x)
    idx = np.arange(n)
    for sign, rows in ((1.0, 1 + idx), (-1.0, n + 1 + idx)):
        T[..., rows, 1 + idx] = 0.5 * s
        T[..., rows, n + 1 + idx] = sign * 0.5 / s
    return T


def coordinate_frame(n: int) -> FrameField:
    return FrameField("coordinate", n, _coordinate_vectors)


def heisenberg_frame(n: int) -> FrameField:
    return FrameField("heisenberg", n, _heisenberg_vectors)


def canonical_frame(n: int) -> FrameField:
    return FrameField("canonical", n, _canonical_vectors, positive_p=True)


def coordinate_coframe(n: int) -> CoframeField:
    return CoframeField("coordinate", n, _coordinate_vectors)


def orthonormal_coframe(n: int) -> CoframeField:
    return CoframeField("orthonormal", n, _orthonormal_covectors, positive_p=True)


def frame(kind: str, n: int) -> FrameField:
    try:
        return {"coordinate": coordinate_frame, "heisenberg": heisenberg_frame, "canonical": canonical_frame}[kind](n)
    except KeyError:
        raise ContractViolation(f"unknown frame kind {kind!r}; expected one of {FRAME_KINDS}") from None


@lru_cache(maxsize=None)
def tps_structure(n: int) -> ParaContactStructure:
    """The phase-space structure with Phi derived as -nabla xi."""
    if n < 1:
        raise ContractViolation("n must be >= 1")
    return ParaContactStructure(
        "tps", n, metric_coords, eta_coords, reeb_coords, canonical_frame(n), phi_table=phi_closed_form(n)
    )


# --- closed forms kept as golden cross-checks ---------------------------------


def phi_closed_form(n: int) -> np.ndarray:
    """Phi in the canonical frame: Phi xi = 0, Phi e+_a = -e-_a, Phi e-_a = -e+_a."""
    N = 2 * n + 1
    P = np.zeros((N, N))
    for a in range(1, n + 1):
        P[n + a, a] = -1.0
        P[a, n + a] = -1.0
    return P


def structure_functions_closed_form(x) -> np.ndarray:
    """gamma^k_ij of the canonical frame: only [e+_a, e-_a] is non-zero."""
    x = as_coords(x)
    n, _, p = _split(x)
    N = 2 * n + 1
    gam = np.zeros(x.shape[:-1] + (N, N, N))
    for a in range(1, n + 1):
        c = -0.5 / np.sqrt(p[..., a - 1])
        for k, val in ((0, 2.0), (a, c), (n + a, c)):
            gam[..., k, a, n + a] = val
            gam[..., k, n + a, a] = -val
    return gam


# --- public operations ---------------------------------------------------------


@dataclass(frozen=True)
class TensorComponents:
    """Components of a (r, s) tensor at a point in a named frame."""

    valence: tuple[int, int]
    frame: str
    components: np.ndarray
    point: ChartPoint

    def __post_init__(self):
        r, s = self.valence
        expected = (self.point.dim,) * (r + s)
        if self.components.shape != expected:
            raise ContractViolation(f"components have shape {self.components.shape}, expected {expected}")


def _checked(x: ChartPoint, frm: FrameField | None = None) -> np.ndarray:
    if frm is not None:
        if frm.n != x.n:
            raise ContractViolation(f"frame is for n={frm.n}, point has n={x.n}")
        if frm.positive_p:
            x.require_positive_p()
    return x.coords


def contact_form_at(x: ChartPoint) -> np.ndarray:
    """Coordinate components of eta over (dw, dq^a, dp_a)."""
    return eta_coords(_checked(x))


def reeb_at(x: ChartPoint) -> np.ndarray:
    return reeb_coords(_checked(x))


def metric_at(x: ChartPoint, frm: FrameField) -> TensorComponents:
    X = _checked(x, frm)
    E = frm.matrix(X)
    return TensorComponents((0, 2), frm.kind, E @ metric_coords(X) @ E.T, x)


def phi_at(x: ChartPoint, frm: FrameField, scheme: StepScheme = NESTED_SCHEME) -> TensorComponents:
    """Phi = -nabla xi via the Koszul formula, expressed in ``frm``.

    ``components[k, j]`` is the k-th frame component of Phi(e_j).
    """
    X = _checked(x, frm)
    geom = FrameGeometry(tps_structure(x.n), frm, scheme)
    return TensorComponents((1, 1), frm.kind, geom.phi_frame(X), x)


def lie_bracket_at(X, Y, x, scheme: StepScheme = DEFAULT_SCHEME) -> np.ndarray:
    """[X, Y] at ``x`` for batched vector fields given by coordinate components."""
    pts = as_coords(x)
    br = bracket_rows(lambda z: np.asarray(X(z))[..., None, :], lambda z: np.asarray(Y(z))[..., None, :], pts, scheme)
    return br[..., 0, 0, :]


def frame_vector(frm: FrameField, i: int):
    """The i-th frame vector as a batched field."""
    return lambda z: frm.matrix(z)[..., i, :]


def structure_functions_at(frm: FrameField, x: ChartPoint, scheme: StepScheme = DEFAULT_SCHEME) -> np.ndarray:
    """gamma[k, i, j] with [e_i, e_j] = gamma^k_ij e_k."""
    X = _checked(x, frm)
    E = frm.matrix(X)
    coframe_of(E)
    br = bracket_rows(frm.matrix, frm.matrix, X, scheme)
    return np.einsum("km,ijm->kij", coframe_of(E), br)


def exterior_derivative(form, x, scheme: StepScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Coordinate components (d alpha)_{mu nu} = d_mu alpha_nu - d_nu alpha_mu."""
    J = jacobian(form, as_coords(x), scheme)  # (..., mu, nu) = d_mu alpha_nu
    return J - np.swapaxes(J, -1, -2)


def d_eta_at(x: ChartPoint, frm: FrameField, scheme: StepScheme = DEFAULT_SCHEME) -> TensorComponents:
    """d eta(e_i, e_j) in the full convention."""
    X = _checked(x, frm)
    E = frm.matrix(X)
    return TensorComponents((0, 2), frm.kind, E @ exterior_derivative(eta_coords, X, scheme) @ E.T, x)


@lru_cache(maxsize=None)
def _permutations(N: int):
    perms = np.array(list(itertools.permutations(range(N))))
    # parity via inversion count
    inv = np.zeros(len(perms), dtype=int)
    for a in range(N):
        for b in range(a + 1, N):
            inv += perms[:, a] > perms[:, b]
    return perms, np.where(inv % 2 == 0, 1.0, -1.0)


def top_form_coefficient(one_form: np.ndarray, two_form: np.ndarray, basis: np.ndarray) -> float:
    """(alpha ^ omega^n)(b_0, ..., b_2n) in the determinant convention.

    ``one_form`` and ``two_form`` are coordinate components at a point,
    ``basis`` the ordered vectors (rows) the top form is evaluated on.
    """
    N = len(one_form)
    n = (N - 1) // 2
    a = basis @ one_form
    w = basis @ two_form @ basis.T
    perms, signs = _permutations(N)
    terms = a[perms[:, 0]]
    for k in range(n):
        terms = terms * w[perms[:, 2 * k + 1], perms[:, 2 * k + 2]]
    return float(np.dot(signs, terms) / 2**n)


def darboux_volume_basis(n: int) -> np.ndarray:
    """Ordered coordinate vectors d/dw, d/dq^1, d/dp_1, ..., d/dq^n, d/dp_n."""
    order = [0]
    for a in range(1, n + 1):
        order += [a, n + a]
    return np.eye(2 * n + 1)[order]


def volume_coefficient_at(x: ChartPoint, scheme: StepScheme = DEFAULT_SCHEME) -> float:
    """Coefficient of eta ^ (d eta)^n against dw ^ dq^1 ^ dp_1 ^ ... ^ dq^n ^ dp_n."""
    X = _checked(x)
    return top_form_coefficient(eta_coords(X), exterior_derivative(eta_coords, X, scheme), darboux_volume_basis(x.n))


def expected_volume_coefficient(n: int) -> float:
    return float(math.factorial(n))
