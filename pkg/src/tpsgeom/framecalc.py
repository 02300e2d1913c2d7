"""Frame-based tensor calculus shared by the phase space and the Heisenberg group.

A para-contact metric structure is described by coordinate-level fields
(metric, contact form, Reeb field, optionally Phi) plus an adapted frame. All
fields are batched callables ``(..., N) -> (..., *shape)``.

Array conventions (frame components throughout):

* ``E[..., i, mu]``     coordinate components of frame vector e_i
* ``theta[..., i, mu]`` dual coframe, ``theta @ E.T = I``
* ``gamma[..., k, i, j]`` structure functions, ``[e_i, e_j] = gamma^k_ij e_k``
* ``conn[..., k, j, i]``  connection symbols, ``nabla_{e_i} e_j = Gamma^k_ji e_k``
* ``riem[..., i, j, k, l]`` curvature R^i_jkl, the i-th component of
  ``R(e_l, e_k) e_j``; antisymmetric in (k, l)
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation, DomainError, FrameError
from .numerics import NESTED_SCHEME, StepScheme, jacobian

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FrameField:
    """2n+1 vector fields given by their coordinate components.

    ``vectors(x)`` returns ``(..., N, N)`` with row i the components of e_i.
    """

    kind: str
    n: int
    vectors: Field
    positive_p: bool = False

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.positive_p and np.any(x[..., self.n + 1 :] <= 0):
            raise DomainError(f"{self.kind} frame needs p_a > 0")
        return self.vectors(x)


@dataclass(frozen=True)
class CoframeField:
    """2n+1 one-forms given by their coordinate components (rows)."""

    kind: str
    n: int
    covectors: Field
    positive_p: bool = False

    def matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.positive_p and np.any(x[..., self.n + 1 :] <= 0):
            raise DomainError(f"{self.kind} coframe needs p_a > 0")
        return self.covectors(x)


@dataclass(frozen=True)
class ParaContactStructure:
    """(eta, xi, Phi, G) on a (2n+1)-dimensional chart.

    ``phi`` gives the coordinate components ``Phi^mu_nu`` (``Phi(v) = phi @ v``).
    When it is ``None`` the tensor is derived as ``-nabla xi`` from the
    Levi-Civita connection of ``metric``. ``phi_table`` optionally records the
    tabulated frame components of Phi, kept as an independent cross-check.
    """

    name: str
    n: int
    metric: Field
    contact_form: Field
    reeb: Field
    frame: FrameField
    phi: Optional[Field] = None
    phi_table: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def perturbed(self, tensor: str, eps: float = 1e-3, component=None) -> "ParaContactStructure":
        """Copy with one structure tensor shifted by ``eps`` on one frame component.

        Used as a negative control: every verification suite must notice.
        """
        N = self.dim
        if tensor == "metric":
            i, j = component or (1, 1)
            bump = np.zeros((N, N))
            bump[i, j] += eps
            bump[j, i] += eps if i != j else 0.0

            def metric(x, base=self.metric, frame=self.frame):
                theta = coframe_of(frame.matrix(x))
                return base(x) + np.einsum("...im,ij,...jn->...mn", theta, bump, theta)

            return replace(self, name=f"{self.name}+dG", metric=metric)
        if tensor == "contact_form":
            i = component if component is not None else 1

            def eta(x, base=self.contact_form, frame=self.frame):
                return base(x) + eps * coframe_of(frame.matrix(x))[..., i, :]

            return replace(self, name=f"{self.name}+deta", contact_form=eta)
        if tensor == "reeb":
            i = component if component is not None else 1

            def xi(x, base=self.reeb, frame=self.frame):
                return base(x) + eps * frame.matrix(x)[..., i, :]

            return replace(self, name=f"{self.name}+dxi", reeb=xi)
        if tensor == "phi":
            k, j = component or (1, 1)
            base_geom = FrameGeometry(self)

            def phi(x, geom=base_geom):
                E = geom.frame.matrix(x)
                pf = geom.phi_frame(x)
                pf[..., k, j] += eps
                return np.einsum("...km,...kj,...jn->...mn", E, pf, coframe_of(E))

            return replace(self, name=f"{self.name}+dPhi", phi=phi)
        raise ContractViolation(f"unknown structure tensor {tensor!r}")


def coframe_of(E: np.ndarray) -> np.ndarray:
    """Dual coframe rows of a frame matrix."""
    det = np.linalg.det(E)
    if np.any(np.abs(det) <= 1e-12):
        raise FrameError("frame matrix is singular")
    return np.swapaxes(np.linalg.inv(E), -1, -2)


def bracket_rows(A: Field, B: Field, x, scheme: StepScheme) -> np.ndarray:
    """Pairwise Lie brackets of two families of vector fields.

    ``A(x)`` and ``B(x)`` return ``(..., m, N)`` rows of coordinate components;
    the result ``[..., i, j, mu]`` holds ``[A_i, B_j]^mu``.
    """
    a, b = A(x), B(x)
    da = jacobian(A, x, scheme)  # (..., nu, i, mu)
    db = jacobian(B, x, scheme)
    return np.einsum("...iv,...vjm->...ijm", a, db) - np.einsum("...jv,...vim->...ijm", b, da)


class FrameGeometry:
    """Batched evaluation of connection-level objects in one frame."""

    def __init__(self, structure: ParaContactStructure, frame: FrameField | None = None, scheme: StepScheme = NESTED_SCHEME):
        self.structure = structure
        self.frame = frame or structure.frame
        self.scheme = scheme
        if self.frame.n != structure.n:
            raise ContractViolation("frame and structure differ in n")

    # frame data ------------------------------------------------------------
    def E(self, x):
        return self.frame.matrix(x)

    def theta(self, x):
        return coframe_of(self.E(x))

    @staticmethod
    def _apply(E, jac):
        # e_i(f) = E[i, nu] d_nu f, for jac of shape (..., nu, *out)
        out_nd = jac.ndim - E.ndim + 1
        Ef = E.reshape(E.shape + (1,) * out_nd)
        return np.sum(Ef * np.expand_dims(jac, -out_nd - 2), axis=-out_nd - 1)

    def brackets(self, x):
        return bracket_rows(self.E, self.E, x, self.scheme)

    def gamma(self, x):
        return np.einsum("...km,...ijm->...kij", self.theta(x), self.brackets(x))

    def metric(self, x):
        E = self.E(x)
        return np.einsum("...im,...mn,...jn->...ij", E, self.structure.metric(x), E)

    def eta(self, x):
        return np.einsum("...im,...m->...i", self.E(x), self.structure.contact_form(x))

    def xi(self, x):
        return np.einsum("...km,...m->...k", self.theta(x), self.structure.reeb(x))

    # connections -----------------------------------------------------------
    def levi_civita(self, x):
        x = np.asarray(x, dtype=float)
        E = self.E(x)
        g = self.metric(x)
        eg = self._apply(E, jacobian(self.metric, x, self.scheme))  # [i, j, k] = e_i(g_jk)
        gam = self.gamma(x)
        gl = np.einsum("...mij,...mk->...ijk", gam, g)  # g([e_i, e_j], e_k)
        lower = 0.5 * (
            np.einsum("...ijk->...kji", eg)
            + np.einsum("...jik->...kji", eg)
            - np.einsum("...kij->...kji", eg)
            + np.einsum("...ijk->...kji", gl)
            - np.einsum("...ikj->...kji", gl)
            - np.einsum("...jki->...kji", gl)
        )
        return np.einsum("...mk,...kji->...mji", np.linalg.inv(g), lower)

    def nabla_xi(self, x, conn=None):
        """``A[k, j]``: k-th component of nabla_{e_j} xi under the Levi-Civita connection."""
        x = np.asarray(x, dtype=float)
        conn = self.levi_civita(x) if conn is None else conn
        exi = self._apply(self.E(x), jacobian(self.xi, x, self.scheme))  # [j, k] = e_j(xi^k)
        return np.swapaxes(exi, -1, -2) + np.einsum("...l,...klj->...kj", self.xi(x), conn)

    def phi_frame(self, x):
        """Phi in the frame: ``P[k, j]`` is the k-th component of Phi(e_j)."""
        x = np.asarray(x, dtype=float)
        if self.structure.phi is None:
            return -self.nabla_xi(x)
        E = self.E(x)
        return np.einsum("...km,...mn,...jn->...kj", self.theta(x), self.structure.phi(x), E)

    def phi_coord(self, x):
        x = np.asarray(x, dtype=float)
        if self.structure.phi is not None:
            return self.structure.phi(x)
        E = self.E(x)
        return np.einsum("...km,...kj,...jn->...mn", E, self.phi_frame(x), self.theta(x))

    def canonical(self, x):
        """Canonical connection built from Levi-Civita with Phi replaced by -nabla xi.

        For structures whose Phi equals -nabla xi this is exactly
        ``nabla_X Y + eta(X) Phi Y - eta(Y) nabla_X xi + (nabla_X eta)(Y) xi``.
        """
        x = np.asarray(x, dtype=float)
        conn = self.levi_civita(x)
        P = -self.nabla_xi(x, conn)
        eta = self.eta(x)
        xi = self.xi(x)
        e_eta = self._apply(self.E(x), jacobian(self.eta, x, self.scheme))  # [i, j] = e_i(eta_j)
        nabla_eta = np.swapaxes(e_eta, -1, -2) - np.einsum("...mji,...m->...ji", conn, eta)  # [j, i]
        return (
            conn
            + np.einsum("...i,...kj->...kji", eta, P)
            + np.einsum("...j,...ki->...kji", eta, P)
            + np.einsum("...ji,...k->...kji", nabla_eta, xi)
        )

    # curvature and torsion -------------------------------------------------
    def torsion(self, conn, x):
        """``T[k, i, j]``: k-th component of T(e_i, e_j)."""
        return np.swapaxes(conn, -1, -2) - conn - self.gamma(x)

    def riemann(self, conn_fn: Field, x):
        x = np.asarray(x, dtype=float)
        conn = conn_fn(x)
        econn = self._apply(self.E(x), jacobian(conn_fn, x, self.scheme))  # [l, i, j, k] = e_l(G^i_jk)
        gam = self.gamma(x)
        return (
            np.einsum("...lijk->...ijkl", econn)
            - np.einsum("...kijl->...ijkl", econn)
            + np.einsum("...mjk,...iml->...ijkl", conn, conn)
            - np.einsum("...mjl,...imk->...ijkl", conn, conn)
            + np.einsum("...mkl,...ijm->...ijkl", gam, conn)
        )
