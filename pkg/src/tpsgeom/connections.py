"""Levi-Civita and canonical connections, torsion, curvature, Nijenhuis tensor.

Every operation takes a chart point (a :class:`ChartPoint` or a batch of
coordinate arrays of shape ``(..., 2n+1)``) and an optional structure; the
default structure is the thermodynamic phase space for the point's ``n``.
Residual-returning checks reduce with a max over all components and points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import ChartPoint, as_coords, dimension_parameter
from .framecalc import FrameField, FrameGeometry, ParaContactStructure
from .numerics import DEFAULT_SCHEME, NESTED_SCHEME, StepScheme, jacobian
from .phase_space import exterior_derivative, tps_structure

CONNECTION_SOURCES = ("koszul_numeric", "closed_form_levi_civita", "closed_form_canonical", "canonical_from_levi_civita")


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Connection symbols ``conn[k, j, i]`` (nabla_{e_i} e_j = Gamma^k_ji e_k) as a field."""

    frame: FrameField
    source: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    structure: ParaContactStructure

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(as_coords(x))


@dataclass(frozen=True)
class CurvatureComponents:
    components: np.ndarray  # [..., i, j, k, l] = R^i_jkl
    frame: str
    connection: str


def _resolve(x, structure):
    X = as_coords(x)
    if isinstance(x, ChartPoint) and structure is None:
        structure = tps_structure(x.n)
    if structure is None:
        structure = tps_structure(dimension_parameter(X))
    return X, structure


def _geometry(structure, frame=None, scheme=NESTED_SCHEME):
    return FrameGeometry(structure, frame, scheme)


# --- closed-form tables --------------------------------------------------------


def _c(X, a, n):
    return 0.5 / np.sqrt(X[..., n + a])


def levi_civita_closed_form(x) -> np.ndarray:
    """Levi-Civita symbols of the canonical frame tabulated in closed form."""
    X = as_coords(x)
    n = dimension_parameter(X)
    N = 2 * n + 1
    conn = np.zeros(X.shape[:-1] + (N, N, N))
    for a in range(1, n + 1):
        m = n + a
        c = _c(X, a, n)
        conn[..., 0, m, a] = 1.0
        conn[..., 0, a, m] = -1.0
        for k, j, i in ((a, 0, m), (a, m, 0), (m, 0, a), (m, a, 0)):
            conn[..., k, j, i] = 1.0
        conn[..., a, m, m] = c
        conn[..., m, a, m] = c
        conn[..., a, m, a] = -c
        conn[..., m, a, a] = -c
    return conn


def canonical_closed_form(x) -> np.ndarray:
    """Canonical-connection symbols of the canonical frame tabulated in closed form."""
    X = as_coords(x)
    n = dimension_parameter(X)
    N = 2 * n + 1
    conn = np.zeros(X.shape[:-1] + (N, N, N))
    for a in range(1, n + 1):
        m = n + a
        c = _c(X, a, n)
        conn[..., a, m, a] = -c
        conn[..., a, m, m] = c
        conn[..., m, a, a] = -c
        conn[..., m, a, m] = c
    return conn


# --- connections ---------------------------------------------------------------


def levi_civita(structure: ParaContactStructure, frame: FrameField | None = None, scheme=NESTED_SCHEME) -> ConnectionCoefficients:
    geom = _geometry(structure, frame, scheme)
    return ConnectionCoefficients(geom.frame, "koszul_numeric", geom.levi_civita, structure)


def canonical_connection(structure: ParaContactStructure, frame: FrameField | None = None, scheme=NESTED_SCHEME) -> ConnectionCoefficients:
    geom = _geometry(structure, frame, scheme)
    return ConnectionCoefficients(geom.frame, "canonical_from_levi_civita", geom.canonical, structure)


def closed_form_connection(n: int, which: str) -> ConnectionCoefficients:
    structure = tps_structure(n)
    if which == "levi_civita":
        return ConnectionCoefficients(structure.frame, "closed_form_levi_civita", levi_civita_closed_form, structure)
    return ConnectionCoefficients(structure.frame, "closed_form_canonical", canonical_closed_form, structure)


def levi_civita_at(x, frame: FrameField | None = None, structure=None, scheme=NESTED_SCHEME) -> np.ndarray:
    """Koszul-formula Levi-Civita symbols ``conn[k, j, i]`` at ``x``."""
    X, structure = _resolve(x, structure)
    return levi_civita(structure, frame, scheme)(X)


def canonical_connection_at(x, frame: FrameField | None = None, structure=None, scheme=NESTED_SCHEME) -> np.ndarray:
    X, structure = _resolve(x, structure)
    return canonical_connection(structure, frame, scheme)(X)


def torsion_at(conn: ConnectionCoefficients, x) -> np.ndarray:
    """``T[k, i, j]``: k-th component of T(e_i, e_j)."""
    X = as_coords(x)
    geom = _geometry(conn.structure, conn.frame)
    return geom.torsion(conn(X), X)


def riemann_at(conn: ConnectionCoefficients, x, scheme: StepScheme = NESTED_SCHEME) -> CurvatureComponents:
    X = as_coords(x)
    geom = _geometry(conn.structure, conn.frame, scheme)
    return CurvatureComponents(geom.riemann(conn.evaluator, X), conn.frame.kind, conn.source)


def ricci_from_riemann(riem: np.ndarray) -> np.ndarray:
    """Ric_jl = R^i_jli, the trace of X -> R(X, e_l) e_j."""
    return np.einsum("...ijli->...jl", riem)


def ricci_at(conn: ConnectionCoefficients, x, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    return ricci_from_riemann(riemann_at(conn, x, scheme).components)


def scalar_curvature_at(conn: ConnectionCoefficients, x, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    X = as_coords(x)
    ric = ricci_at(conn, X, scheme)
    g = _geometry(conn.structure, conn.frame).metric(X)
    return np.einsum("...jl,...jl->...", np.linalg.inv(g), ric)


def fit_eta_einstein(ric: np.ndarray, eta: np.ndarray, g: np.ndarray):
    """Least-squares (lambda, nu) with Ric = lambda eta(x)eta + nu G, per point.

    Uses every independent (upper-triangular) component; returns arrays of
    lambda, nu and the worst absolute residual at each point.
    """
    N = ric.shape[-1]
    iu = np.triu_indices(N)
    ee = (eta[..., :, None] * eta[..., None, :])[..., iu[0], iu[1]]
    gg = g[..., iu[0], iu[1]]
    rr = ric[..., iu[0], iu[1]]
    batch = rr.shape[:-1]
    A = np.stack([ee, gg], axis=-1).reshape(-1, len(iu[0]), 2)
    b = rr.reshape(-1, len(iu[0]))
    lam = np.empty(len(A))
    nu = np.empty(len(A))
    res = np.empty(len(A))
    for k in range(len(A)):
        coef, *_ = np.linalg.lstsq(A[k], b[k], rcond=None)
        lam[k], nu[k] = coef
        res[k] = np.max(np.abs(A[k] @ coef - b[k]))
    return lam.reshape(batch), nu.reshape(batch), res.reshape(batch)


def eta_einstein_fit(x, structure=None, scheme: StepScheme = NESTED_SCHEME):
    """(lambda, nu, residual) for the Levi-Civita Ricci tensor in the canonical frame."""
    X, structure = _resolve(x, structure)
    geom = _geometry(structure, scheme=scheme)
    ric = ricci_from_riemann(geom.riemann(geom.levi_civita, X))
    lam, nu, res = fit_eta_einstein(ric, geom.eta(X), geom.metric(X))
    if np.ndim(lam) == 0:
        return float(lam), float(nu), float(res)
    return lam, nu, res


# --- Nijenhuis tensor and normality --------------------------------------------


def d_eta_frame(structure: ParaContactStructure, X, frame: FrameField | None = None, scheme=DEFAULT_SCHEME) -> np.ndarray:
    E = (frame or structure.frame).matrix(X)
    return np.einsum("...im,...mn,...jn->...ij", E, exterior_derivative(structure.contact_form, X, scheme), E)


def nijenhuis_tensor(x, structure=None, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    """``N[k, i, j]``: frame components of N_Phi(e_i, e_j) in the structure's frame."""
    from .framecalc import bracket_rows

    X, structure = _resolve(x, structure)
    geom = _geometry(structure, scheme=scheme)

    def phi_rows(z):
        return np.einsum("...mn,...in->...im", geom.phi_coord(z), geom.E(z))

    phi = geom.phi_coord(X)
    br_ee = bracket_rows(geom.E, geom.E, X, scheme)
    br_pp = bracket_rows(phi_rows, phi_rows, X, scheme)
    br_pe = bracket_rows(phi_rows, geom.E, X, scheme)
    br_ep = bracket_rows(geom.E, phi_rows, X, scheme)
    apply = lambda v: np.einsum("...mn,...ijn->...ijm", phi, v)  # noqa: E731
    N_coord = apply(apply(br_ee)) + br_pp - apply(br_pe) - apply(br_ep)
    return np.einsum("...km,...ijm->...kij", geom.theta(X), N_coord)


def nijenhuis_at(x, X_vec, Y_vec, structure=None, scheme: StepScheme = NESTED_SCHEME) -> np.ndarray:
    """N_Phi(X, Y) for constant-coefficient frame combinations X, Y (frame components)."""
    N = nijenhuis_tensor(x, structure, scheme)
    return np.einsum("...kij,i,j->...k", N, np.asarray(X_vec, float), np.asarray(Y_vec, float))


def normality_residual(x, structure=None, scheme: StepScheme = NESTED_SCHEME):
    """(max |N_Phi - d eta (x) xi|, max |horizontal part of N_Phi|)."""
    X, structure = _resolve(x, structure)
    geom = _geometry(structure, scheme=scheme)
    N = nijenhuis_tensor(X, structure, scheme)
    xi = geom.xi(X)
    deta = d_eta_frame(structure, X)
    normal = np.max(np.abs(N - xi[..., :, None, None] * deta[..., None, :, :]))
    vertical = np.einsum("...m,...mij->...ij", geom.eta(X), N)
    horizontal = np.max(np.abs(N - xi[..., :, None, None] * vertical[..., None, :, :]))
    return float(normal), float(horizontal)


# --- parallelism, Killing -------------------------------------------------------


def covariant_derivatives(geom: FrameGeometry, conn_fn, X):
    """Frame components of nabla eta, nabla xi, nabla Phi, nabla G for a connection."""
    conn = conn_fn(X)
    E = geom.E(X)
    app = geom._apply
    sch = geom.scheme
    eta, xi, g, P = geom.eta(X), geom.xi(X), geom.metric(X), geom.phi_frame(X)
    d_eta = app(E, jacobian(geom.eta, X, sch)) - np.einsum("...mji,...m->...ij", conn, eta)
    d_xi = app(E, jacobian(geom.xi, X, sch)) + np.einsum("...l,...kli->...ik", xi, conn)
    d_g = (
        app(E, jacobian(geom.metric, X, sch))
        - np.einsum("...mji,...mk->...ijk", conn, g)
        - np.einsum("...mki,...jm->...ijk", conn, g)
    )
    d_phi = (
        app(E, jacobian(geom.phi_frame, X, sch))
        + np.einsum("...kmi,...mj->...ikj", conn, P)
        - np.einsum("...km,...mji->...ikj", P, conn)
    )
    return d_eta, d_xi, d_phi, d_g


def parallelism_residuals(x, structure=None, conn: ConnectionCoefficients | None = None, scheme=NESTED_SCHEME):
    """Max-norm of nabla eta, nabla xi, nabla Phi, nabla G (canonical connection by default)."""
    X, structure = _resolve(x, structure)
    geom = _geometry(structure, scheme=scheme)
    conn_fn = conn.evaluator if conn is not None else geom.canonical
    return tuple(float(np.max(np.abs(t))) for t in covariant_derivatives(geom, conn_fn, X))


def lie_derivative_metric(structure: ParaContactStructure, X, scheme=DEFAULT_SCHEME) -> np.ndarray:
    """Coordinate components of L_xi G."""
    xi = structure.reeb(X)
    dG = jacobian(structure.metric, X, scheme)  # [rho, mu, nu]
    dxi = jacobian(structure.reeb, X, scheme)  # [mu, rho] = d_mu xi^rho
    G = structure.metric(X)
    return (
        np.einsum("...r,...rmn->...mn", xi, dG)
        + np.einsum("...rn,...mr->...mn", G, dxi)
        + np.einsum("...mr,...nr->...mn", G, dxi)
    )


def lie_derivative_phi(geom: FrameGeometry, X) -> np.ndarray:
    """Coordinate components of L_xi Phi."""
    s = geom.structure
    xi = s.reeb(X)
    phi = geom.phi_coord(X)
    dphi = jacobian(geom.phi_coord, X, geom.scheme)  # [rho, mu, nu]
    dxi = jacobian(s.reeb, X, geom.scheme)  # [nu, mu] = d_nu xi^mu
    return (
        np.einsum("...r,...rmn->...mn", xi, dphi)
        - np.einsum("...rn,...rm->...mn", phi, dxi)
        + np.einsum("...mr,...nr->...mn", phi, dxi)
    )


def killing_and_h_check(x, structure=None, scheme=NESTED_SCHEME):
    """Residuals of L_xi G = 0, h = L_xi Phi / 2 = 0 and nabla xi + Phi = 0.

    The last compares the numerically derived nabla xi with the tabulated Phi
    when the structure carries one, so it is not satisfied by construction.
    """
    X, structure = _resolve(x, structure)
    geom = _geometry(structure, scheme=scheme)
    E, theta = geom.E(X), geom.theta(X)
    lie_g = np.einsum("...im,...mn,...jn->...ij", E, lie_derivative_metric(structure, X), E)
    h = 0.5 * np.einsum("...km,...mn,...jn->...kj", theta, lie_derivative_phi(geom, X), E)
    phi_ref = structure.phi_table if structure.phi_table is not None else geom.phi_frame(X)
    grad = geom.nabla_xi(X) + phi_ref
    return float(np.max(np.abs(lie_g))), float(np.max(np.abs(h))), float(np.max(np.abs(grad)))
