import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpsgeom import axioms
from tpsgeom.chart import ChartPoint
from tpsgeom.errors import ContractViolation, DomainError, FrameError
from tpsgeom.framecalc import FrameGeometry, coframe_of
from tpsgeom.phase_space import (
    canonical_frame,
    contact_form_at,
    d_eta_at,
    eta_coords,
    expected_volume_coefficient,
    frame,
    frame_vector,
    heisenberg_frame,
    lie_bracket_at,
    metric_at,
    metric_coords,
    orthonormal_coframe,
    phi_at,
    phi_closed_form,
    reeb_at,
    structure_functions_at,
    structure_functions_closed_form,
    tps_structure,
    volume_coefficient_at,
)

coord = st.floats(-2, 2)
positive = st.floats(0.2, 5)


@st.composite
def chart_points(draw, n=None):
    n = draw(st.integers(1, 3)) if n is None else n
    w = draw(coord)
    q = tuple(draw(coord) for _ in range(n))
    p = tuple(draw(positive) for _ in range(n))
    return ChartPoint(n, w, q, p)


def test_chart_point_validation():
    with pytest.raises(ContractViolation):
        ChartPoint(1, 0.0, (0.0, 1.0), (1.0,))
    with pytest.raises(DomainError):
        ChartPoint(1, float("nan"), (0.0,), (1.0,))
    with pytest.raises(ContractViolation):
        ChartPoint.from_array(np.zeros(4))


def test_contact_form_and_reeb_coordinates():
    x = ChartPoint(2, 0.3, (1.0, -1.0), (2.0, 0.5))
    assert np.array_equal(contact_form_at(x), [1.0, -2.0, -0.5, 0.0, 0.0])
    assert np.array_equal(reeb_at(x), [1.0, 0.0, 0.0, 0.0, 0.0])


def test_metric_coordinate_form_n1():
    # G = (dw - p dq)^2 + (dq dp + dp dq) / 2 at p = 2
    G = metric_coords(np.array([0.0, 0.0, 2.0]))
    expected = np.array([[1.0, -2.0, 0.0], [-2.0, 4.0, 0.5], [0.0, 0.5, 0.0]])
    assert np.array_equal(G, expected)


def test_canonical_frame_requires_positive_p():
    with pytest.raises(DomainError):
        metric_at(ChartPoint(1, 0.0, (0.0,), (-1.0,)), canonical_frame(1))


def test_unknown_frame_kind():
    with pytest.raises(ContractViolation):
        frame("polar", 1)


def test_singular_frame_is_rejected():
    with pytest.raises(FrameError):
        coframe_of(np.zeros((3, 3)))


@given(chart_points())
def test_canonical_metric_is_orthonormal(x):
    g = metric_at(x, canonical_frame(x.n)).components
    expected = np.diag(np.concatenate([[1.0], np.ones(x.n), -np.ones(x.n)]))
    assert np.max(np.abs(g - expected)) < 1e-12


@given(chart_points())
def test_orthonormal_coframe_is_dual(x):
    E = canonical_frame(x.n).matrix(x.coords)
    T = orthonormal_coframe(x.n).matrix(x.coords)
    assert np.max(np.abs(T @ E.T - np.eye(x.dim))) < 1e-12


@given(chart_points())
def test_heisenberg_frame_metric(x):
    g = metric_at(x, heisenberg_frame(x.n)).components
    n = x.n
    expected = np.zeros((x.dim, x.dim))
    expected[0, 0] = 1.0
    for a in range(1, n + 1):
        expected[a, n + a] = expected[n + a, a] = 0.5
    assert np.max(np.abs(g - expected)) < 1e-12


@given(chart_points())
def test_structure_functions_match_closed_form(x):
    gam = structure_functions_at(canonical_frame(x.n), x)
    assert np.max(np.abs(gam - structure_functions_closed_form(x))) < 1e-8


def test_structure_function_values_n1():
    # [e+, e-] = 2 xi - (e+ + e-) / (2 sqrt p)
    gam = structure_functions_closed_form(np.array([0.0, 0.0, 4.0]))
    assert gam[0, 1, 2] == 2.0
    assert gam[1, 1, 2] == gam[2, 1, 2] == -0.25
    assert np.array_equal(gam, -np.swapaxes(gam, 1, 2))


@given(chart_points())
def test_phi_matches_closed_form(x):
    P = phi_at(x, canonical_frame(x.n)).components
    assert np.max(np.abs(P - phi_closed_form(x.n))) < 1e-8


def test_phi_action_n1():
    P = phi_closed_form(1)
    e_plus, e_minus = np.eye(3)[1], np.eye(3)[2]
    assert np.array_equal(P @ e_plus, -e_minus)
    assert np.array_equal(P @ e_minus, -e_plus)
    assert np.array_equal(P @ np.eye(3)[0], np.zeros(3))


def test_lie_bracket_of_heisenberg_fields():
    # [Q, P] = -xi for Q = d/dq + p d/dw, P = d/dp
    fr = heisenberg_frame(1)
    br = lie_bracket_at(frame_vector(fr, 1), frame_vector(fr, 2), np.array([0.1, 0.2, 0.3]))
    assert np.max(np.abs(br - [-1.0, 0.0, 0.0])) < 1e-10


@given(chart_points())
def test_d_eta_in_canonical_frame(x):
    # d eta(e+_a, e-_a) = -eta([e+_a, e-_a]) = -2 in the full convention
    D = d_eta_at(x, canonical_frame(x.n)).components
    expected = np.zeros((x.dim, x.dim))
    for a in range(1, x.n + 1):
        expected[a, x.n + a] = -2.0
        expected[x.n + a, a] = 2.0
    assert np.max(np.abs(D - expected)) < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3])
def test_contact_volume_is_n_factorial(n):
    x = ChartPoint(n, 0.4, tuple(np.linspace(-1, 1, n)), tuple(np.linspace(0.5, 3, n)))
    assert abs(volume_coefficient_at(x) - math.factorial(n)) < 1e-8
    assert expected_volume_coefficient(n) == math.factorial(n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_axioms_hold_on_phase_space(n, chart_points):
    geom = FrameGeometry(tps_structure(n))
    X = chart_points[n]
    assert max(axioms.reeb_residuals(geom, X)) < 1e-12
    assert axioms.metric_reeb_residual(geom, X) < 1e-12
    assert axioms.phi_squared_residual(geom, X) < 1e-8
    assert axioms.compatibility_residual(geom, X) < 1e-8
    sign, res = axioms.association(geom, X)
    assert sign == 1.0 and res < 1e-8
    assert axioms.signature_residual(geom, X, (n + 1, n, 0)) == 0


def test_eta_coords_batched():
    X = np.array([[0.0, 1.0, 2.0], [1.0, 1.0, -3.0]])
    assert np.array_equal(eta_coords(X), [[1.0, -2.0, 0.0], [1.0, 3.0, 0.0]])


@pytest.mark.parametrize("tensor", ["metric", "contact_form", "reeb", "phi"])
def test_perturbed_structure_breaks_an_axiom(tensor, chart_points):
    s = tps_structure(1).perturbed(tensor)
    geom = FrameGeometry(s)
    X = chart_points[1]
    worst = max(
        max(axioms.reeb_residuals(geom, X)),
        axioms.metric_reeb_residual(geom, X),
        axioms.phi_squared_residual(geom, X),
        axioms.compatibility_residual(geom, X),
    )
    assert worst > 1e-5


def test_perturbed_rejects_unknown_tensor():
    with pytest.raises(ContractViolation):
        tps_structure(1).perturbed("torsion")
