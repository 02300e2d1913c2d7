"""Residuals of the para-contact metric axioms, for any structure.

All functions take a :class:`FrameGeometry` and a batch of chart points and
work in the geometry's frame.
"""

from __future__ import annotations

import numpy as np

from .framecalc import FrameGeometry
from .numerics import matrix_signature
from .phase_space import exterior_derivative


def d_eta(geom: FrameGeometry, X) -> np.ndarray:
    E = geom.E(X)
    return np.einsum("...im,...mn,...jn->...ij", E, exterior_derivative(geom.structure.contact_form, X), E)


def reeb_residuals(geom: FrameGeometry, X):
    """(max |eta(xi) - 1|, max |d eta(xi, e_i)|)."""
    xi = geom.xi(X)
    norm = np.max(np.abs(np.einsum("...i,...i->...", geom.eta(X), xi) - 1.0))
    dxi = np.max(np.abs(np.einsum("...i,...ij->...j", xi, d_eta(geom, X))))
    return float(norm), float(dxi)


def metric_reeb_residual(geom: FrameGeometry, X) -> float:
    """max |G(xi, e_i) - eta(e_i)|."""
    return float(np.max(np.abs(np.einsum("...k,...ki->...i", geom.xi(X), geom.metric(X)) - geom.eta(X))))


def phi_squared_residual(geom: FrameGeometry, X) -> float:
    """max |Phi^2 - (I - eta (x) xi)|, plus |Phi xi| folded in."""
    P = geom.phi_frame(X)
    xi, eta = geom.xi(X), geom.eta(X)
    target = np.eye(P.shape[-1]) - xi[..., :, None] * eta[..., None, :]
    kernel = np.einsum("...kj,...j->...k", P, xi)
    return float(max(np.max(np.abs(P @ P - target)), np.max(np.abs(kernel))))


def compatibility_residual(geom: FrameGeometry, X) -> float:
    """max |G(Phi X, Phi Y) + G(X, Y) - eta(X) eta(Y)| over frame pairs."""
    P, g, eta = geom.phi_frame(X), geom.metric(X), geom.eta(X)
    lhs = np.einsum("...ki,...kl,...lj->...ij", P, g, P)
    return float(np.max(np.abs(lhs + g - eta[..., :, None] * eta[..., None, :])))


def association(geom: FrameGeometry, X):
    """Sign s and residual of G(X, Phi Y) = s d eta(X, Y) / 2 over frame pairs.

    The sign is fitted per point; the residual uses the sign of the first point
    for all of them, so a sign that changes between points is reported as a
    large residual.
    """
    A = np.einsum("...ik,...kj->...ij", geom.metric(X), geom.phi_frame(X))
    B = 0.5 * d_eta(geom, X)
    A2 = A.reshape(-1, A.shape[-2] * A.shape[-1])
    B2 = B.reshape(A2.shape)
    ratio = np.sum(A2 * B2, axis=1) / np.sum(B2 * B2, axis=1)
    s = float(np.sign(ratio[0]))
    residual = float(np.max(np.abs(A2 - s * B2)))
    return s, residual


def signature_residual(geom: FrameGeometry, X, expected, zero_tol: float = 1e-9) -> float:
    """Number of sampled points whose metric signature differs from ``expected``."""
    g = geom.metric(X).reshape(-1, geom.structure.dim, geom.structure.dim)
    return float(sum(matrix_signature(m, zero_tol).as_tuple() != tuple(expected) for m in g))
