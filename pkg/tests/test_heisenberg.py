import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpsgeom import heisenberg as hh
from tpsgeom.errors import ContractViolation

reals = st.floats(-3, 3)


@st.composite
def elements(draw, n=1):
    return hh.GroupElement(n, tuple(draw(reals) for _ in range(n)), tuple(draw(reals) for _ in range(n)), draw(reals))


def test_multiply_example():
    g = hh.multiply(hh.GroupElement(1, (1.0,), (0.0,), 0.0), hh.GroupElement(1, (0.0,), (1.0,), 0.0))
    assert g == hh.GroupElement(1, (1.0,), (1.0,), -1.0)


def test_inverse_example():
    g = hh.GroupElement(1, (1.0,), (2.0,), 3.0)
    assert hh.inverse(g) == hh.GroupElement(1, (-1.0,), (-2.0,), -3.0)
    assert hh.multiply(hh.inverse(g), g) == hh.GroupElement.identity(1)


def test_dimension_mismatch():
    with pytest.raises(ContractViolation):
        hh.multiply(hh.GroupElement.identity(1), hh.GroupElement.identity(2))
    with pytest.raises(ContractViolation):
        hh.GroupElement(1, (0.0, 1.0), (0.0,), 0.0)


@given(elements(), elements(), elements())
def test_group_axioms(a, b, c):
    e = hh.GroupElement.identity(1)
    assert hh.multiply(e, a) == a
    assert hh.inverse(hh.inverse(a)) == a
    lhs = hh.multiply(hh.multiply(a, b), c).as_array()
    rhs = hh.multiply(a, hh.multiply(b, c)).as_array()
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_group_axioms_bulk(n):
    assert max(hh.group_axiom_residuals(n, 1000, seed=5)) < 1e-12


def test_chart_round_trip():
    g = hh.sample_group_array(2, 10, seed=1)
    assert np.allclose(hh.from_chart(hh.to_chart(g)), g, atol=0)


def test_frame_at_identity_and_point():
    E = hh.frame_at(hh.GroupElement(1, (0.5,), (-1.5,), 2.0))
    # rows xi, U, V over (tau, u, v)
    assert np.array_equal(E, [[2.0, 0.0, 0.0], [3.0, 1.0, 0.0], [1.0, 0.0, 1.0]])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_left_invariance(n):
    assert hh.left_invariance_residual(hh.sample_group_array(n, 30, seed=n)) < 1e-9


def test_contact_form_duality():
    g = hh.GroupElement(2, (0.3, -1.0), (1.2, 0.4), 0.7)
    theta = hh.contact_form_hh(g)
    pairing = hh.frame_at(g) @ theta
    assert np.allclose(pairing, [1.0, 0, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("n,expected", [(1, -1.0), (2, 4.0), (3, -24.0)])
def test_contact_condition_coefficient(n, expected):
    g = hh.sample_group_array(n, 1, seed=0)[0]
    assert abs(hh.contact_volume_coefficient(g) - expected) < 1e-8


def test_phi_table():
    P = hh.phi_table(2)
    assert np.array_equal(P @ np.eye(5)[1], np.eye(5)[3])
    assert np.array_equal(P @ np.eye(5)[3], np.eye(5)[1])
    assert not np.any(P @ np.eye(5)[0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_structure_checks(n):
    X = hh.to_chart(hh.sample_group_array(n, 15, seed=9))
    rep = hh.structure_checks(n, X)
    assert rep.association_sign == -1.0
    assert rep.signature_mismatches == 0
    for key, value in rep.residuals().items():
        assert value < 1e-8, key
    assert (rep.torsion_restricted is not None) == (n == 1)
