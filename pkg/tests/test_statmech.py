import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpsgeom import statmech as sm
from tpsgeom.errors import ConfigError, ContractViolation, DomainError
from tpsgeom.numerics import DiscreteSpace


@pytest.fixture(scope="module")
def models():
    return {name: sm.get_model(name) for name in sm.BUILTIN_MODELS}


def test_two_level_spot_values(models):
    m = models["two_level"]
    assert abs(sm.log_partition(m, [0.0]) - math.log(2.0)) < 1e-12
    assert abs(sm.mean_observables(m, [0.0])[0]) < 1e-15
    assert abs(sm.covariance_matrix(m, [0.0])[0, 0] - 1.0) < 1e-12
    assert np.allclose(sm.fisher_rao_control_metric(m, [0.0]), np.eye(2), atol=1e-12)


def test_gaussian_quadratic_spot_values(models):
    m = models["gaussian_quadratic"]
    assert abs(sm.log_partition(m, [-1.0]) - 0.5 * math.log(math.pi)) < 1e-10
    assert abs(sm.mean_observables(m, [-1.0])[0] - 0.5) < 1e-10
    assert abs(sm.covariance_matrix(m, [-1.0])[0, 0] - 0.5) < 1e-10
    G = sm.fisher_rao_control_metric(m, [-1.0])
    assert np.allclose(G, [[1.0, -0.5], [-0.5, 0.75]], atol=1e-10)


@settings(max_examples=15)
@given(st.floats(-3, 3))
def test_two_level_closed_forms(q):
    m = sm.two_level()
    assert abs(sm.log_partition(m, [q]) - math.log(2 * math.cosh(q))) < 1e-12
    assert abs(sm.mean_observables(m, [q])[0] - math.tanh(q)) < 1e-12
    assert abs(sm.covariance_matrix(m, [q])[0, 0] - 1 / math.cosh(q) ** 2) < 1e-12


@settings(max_examples=10)
@given(st.floats(-3, -0.2))
def test_gaussian_quadratic_closed_forms(q):
    m = sm.gaussian_quadratic()
    assert abs(sm.log_partition(m, [q]) - 0.5 * math.log(math.pi / -q)) < 1e-8
    assert abs(sm.mean_observables(m, [q])[0] + 0.5 / q) < 1e-8
    assert abs(sm.covariance_matrix(m, [q])[0, 0] - 0.5 / q**2) < 1e-8


@settings(max_examples=8)
@given(st.floats(-1, 1), st.floats(-2.5, -0.5))
def test_two_param_covariance_is_hessian(q1, q2):
    m = sm.gaussian_two_param()
    q = [q1, q2]
    # closed-form Hessian of w = ln(pi / -q2) / 2 + q1^2 / (-4 q2)
    H = np.array([[-1 / (2 * q2), q1 / (2 * q2**2)], [q1 / (2 * q2**2), 1 / (2 * q2**2) - q1**2 / (2 * q2**3)]])
    assert np.max(np.abs(sm.covariance_matrix(m, q) - H)) < 1e-6
    assert np.max(np.abs(sm.log_partition_hessian(m, q) - H)) < 1e-6


@pytest.mark.parametrize("name", list(sm.BUILTIN_MODELS))
def test_gradient_identity_on_grid(name, models):
    m = models[name]
    for q in m.grid(5):
        assert np.max(np.abs(sm.log_partition_gradient(m, q) - sm.mean_observables(m, q))) < 1e-6


def test_relative_entropy_two_level_value(models):
    m = models["two_level"]
    assert abs(sm.relative_entropy(m, [0.0], [0.1]) - math.log(math.cosh(0.1))) < 1e-12
    assert abs(sm.relative_entropy(m, [0.0], [0.1]) - 4.9917e-3) < 1e-7


@settings(max_examples=15)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_relative_entropy_nonnegative_and_paths_agree(a, b):
    m = sm.two_level()
    kl_i = sm.relative_entropy(m, [a], [b], "integral")
    kl_b = sm.relative_entropy(m, [a], [b], "bregman")
    assert kl_i >= -1e-12
    assert abs(kl_i - kl_b) < 1e-10


def test_relative_entropy_zero_at_coincidence(models):
    for name, m in models.items():
        q = m.grid(3)[1]
        assert abs(sm.relative_entropy(m, q, q)) < 1e-14


def test_relative_entropy_rejects_unknown_method(models):
    with pytest.raises(ContractViolation):
        sm.relative_entropy(models["two_level"], [0.0], [0.1], "chord")


def test_quadratic_residual_order(models):
    m = models["two_level"]
    deltas = [0.1, 0.05, 0.025]
    rem = [sm.kl_quadratic_residual(m, [0.3], [d])[2] for d in deltas]
    assert abs(sm.observed_order(deltas, rem) - 3.0) < 0.3
    assert sm.kl_quadratic_residual(m, [0.3], [0.0]) == (0.0, 0.0, 0.0)


def test_symmetric_sum_has_fourth_order_remainder(models):
    m = models["two_level"]
    deltas = [0.1, 0.05, 0.025]
    rem = [sm.kl_symmetric_residual(m, [0.3], [d]) for d in deltas]
    assert abs(sm.observed_order(deltas, rem) - 4.0) < 0.3


def test_entropy_differential_two_level(models):
    ed = sm.entropy_differential(models["two_level"], [0.5])
    assert np.allclose(ed.first_moment, [1.0, -0.4621172], atol=1e-7)
    assert ed.moment_identity_residual() < 1e-9
    assert np.allclose(ed.second_moment, sm.fisher_rao_control_metric(models["two_level"], [0.5]), atol=1e-12)


def test_legendre_embed_two_level(models):
    x = sm.legendre_embed(models["two_level"], [0.5])
    assert x.n == 1
    assert abs(x.w - math.log(2 * math.cosh(0.5))) < 1e-12
    assert x.q == (0.5,)
    assert abs(x.p[0] - math.tanh(0.5)) < 1e-12


def test_gaussian_embedding_has_positive_p(models):
    for q in models["gaussian_quadratic"].grid(7):
        assert sm.legendre_embed(models["gaussian_quadratic"], q).p[0] > 0


@pytest.mark.parametrize("name", list(sm.BUILTIN_MODELS))
def test_pullback_chain(name, models):
    m = models[name]
    q = m.grid(5)[2]
    G_ctrl, eta_ctrl = sm.control_pullbacks(m, q, w=0.7)
    assert np.max(np.abs(G_ctrl - sm.fisher_rao_control_metric(m, q))) < 1e-8
    assert np.max(np.abs(eta_ctrl - sm.entropy_differential(m, q).first_moment)) < 1e-12
    g, eta = sm.legendre_pullbacks(m, q)
    assert np.max(np.abs(g - sm.induced_metric(m, q).matrix)) < 1e-8
    assert np.max(np.abs(eta)) < 1e-7


def test_induced_metric_flag(models):
    im = sm.induced_metric(models["two_level"], [0.0])
    assert np.allclose(im.matrix, [[1.0]])
    assert im.ruppeiner_sign == -1


def test_invertibility(models):
    assert sm.invertibility_check(models["two_level"], [1.3])[1]
    assert sm.invertibility_check(models["gaussian_two_param"], [0.2, -1.0])[1]
    dup = sm.GibbsModel("dup", DiscreteSpace((-1.0, 1.0)), ("x", "x"), sm.QDomain((-9.0, -9.0), (9.0, 9.0)))
    det, ok = sm.invertibility_check(dup, [0.2, 0.1])
    assert abs(det) < 1e-12 and not ok


def test_domain_is_enforced(models):
    with pytest.raises(DomainError):
        sm.log_partition(models["gaussian_quadratic"], [0.5])
    with pytest.raises(ContractViolation):
        sm.log_partition(models["two_level"], [0.1, 0.2])


def test_unknown_model_and_observable():
    with pytest.raises(ConfigError):
        sm.get_model("ising")
    with pytest.raises(ConfigError):
        sm.GibbsModel("bad", DiscreteSpace((0.0,)), ("x^7",), sm.QDomain((-1.0,), (1.0,)))


def test_yaml_model_round_trip(tmp_path):
    cfg = tmp_path / "gauss.yaml"
    cfg.write_text(
        "name: shifted\n"
        "space: {type: interval}\n"
        "observables: [x, x^2]\n"
        "q_domain: {lo: [-inf, -inf], hi: [inf, 0]}\n"
        "grid: {lo: [-1, -2], hi: [1, -1]}\n"
    )
    m = sm.load_model(cfg)
    ref = sm.gaussian_two_param()
    for q in m.grid(3):
        assert abs(sm.log_partition(m, q) - sm.log_partition(ref, q)) < 1e-12


def test_yaml_discrete_with_weights():
    m = sm.model_from_dict({"name": "w", "space": {"type": "discrete", "points": [0, 1], "weights": [1, 2]}, "observables": ["x"]})
    assert abs(sm.log_partition(m, [0.0]) - math.log(3.0)) < 1e-14


@pytest.mark.parametrize(
    "cfg",
    [
        {"space": {"type": "interval"}, "observables": ["x"]},
        {"name": "a", "space": {"type": "lattice"}, "observables": ["x"]},
        {"name": "a", "space": {"type": "interval"}, "observables": ["x"], "q_domain": {"lo": [1], "hi": [0]}},
    ],
)
def test_malformed_model_configs(cfg):
    with pytest.raises(ConfigError):
        sm.model_from_dict(cfg)
