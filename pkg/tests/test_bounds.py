import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import TypeAdapter

from softq.errors import DimensionMismatch
from softq.models import QTable, SoftOperatorKind, assemble_matrices, uniform_distribution
from softq.services import BoundKind, BoundParams, bound_curve, decay_rate
from softq.services import bounds_service as bs
from softq.services.bounds_reference import REFERENCE_FUNCTIONS, reference_grid
from softq.services.comparison_service import SwitchingModel
from softq.services.learner_service import noise_covariance


def _anchor(**overrides):
    base = dict(alpha=0.001, beta=1000.0, gamma=0.9, d_min=0.25, d_max=0.25, n_pairs=4, n_actions=2)
    base.update(overrides)
    return BoundParams(**base)


def test_decay_rate_anchors():
    assert decay_rate(_anchor()) == pytest.approx(0.999975, abs=1e-15)
    assert decay_rate(_anchor(alpha=0.5, d_min=0.5, d_max=0.5, gamma=0.0)) == pytest.approx(0.75)


def test_constant_anchors():
    p = _anchor()
    assert bs.lse_lower_bound(0, p) == pytest.approx(19.609, abs=1e-3)
    assert bs.noise_moment_bound(p) == pytest.approx(600.832, abs=1e-3)
    assert bs.iterate_bound(p) == pytest.approx(10.00624, abs=1e-5)


def test_zero_steps_annihilate_linear_term():
    p = _anchor(q0_gap_l2=3.0)
    assert bs.linear_geometric_term(0, p) == 0.0
    assert bs.geometric_term(0, p) == 1.0
    expected = bs.lse_final_constant(p) + 2.0 * 4**1.5 / 0.1
    assert bs.lse_final_bound(0, p) == pytest.approx(expected)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 1.0},
        {"alpha": 0.0},
        {"beta": 0.0},
        {"gamma": 1.0},
        {"d_min": 0.0},
        {"d_min": 0.3, "d_max": 0.2},
        {"q0_gap_l2": -1.0},
    ],
)
def test_invalid_parameters_are_rejected(kwargs):
    with pytest.raises(ValueError):
        _anchor(**kwargs)


def test_matches_reference_implementation():
    for point in reference_grid(100, seed=0):
        p, k = point["params"], point["k"]
        for kind, reference in REFERENCE_FUNCTIONS.items():
            fast = float(bs.evaluate(kind, k, p))
            slow = reference(k, p)
            assert fast == pytest.approx(slow, rel=1e-10), f"{kind.value} difiere en k={k}: {p}"


@given(
    st.floats(1e-4, 0.5),
    st.floats(0.1, 1e4),
    st.sampled_from([0.0, 0.5, 0.9]),
    st.integers(0, 10_000),
    st.floats(0.0, 20.0),
)
@settings(max_examples=300, deadline=None)
def test_lower_bound_squared_is_below_twice_trace(alpha, beta, gamma, k, gap):
    p = _anchor(alpha=alpha, beta=beta, gamma=gamma, q0_gap_l2=gap)
    lower = bs.lse_lower_bound(k, p)
    assert lower**2 <= 2.0 * bs.trace_bound(k, p) * (1.0 + 1e-12)


def test_final_bounds_increase_with_alpha_and_decrease_with_beta():
    k = 100_000
    gap = dict(q0_gap_l2=20.0, q0_gap_linf=10.0)
    for kind in (BoundKind.LSE_FINAL, BoundKind.BOLTZ_FINAL):
        by_alpha = [bs.evaluate(kind, k, _anchor(alpha=a, **gap)) for a in (1e-4, 1e-3, 1e-2)]
        by_beta = [bs.evaluate(kind, k, _anchor(beta=b, **gap)) for b in (10.0, 100.0, 1e3, 1e4)]
        assert by_alpha == sorted(by_alpha), f"{kind.value} debe crecer con alpha"
        assert by_beta == sorted(by_beta, reverse=True), f"{kind.value} debe decrecer con beta"


def test_transients_vanish_at_horizon():
    p = _anchor(q0_gap_l2=3.0)
    horizon = bs.transient_horizon(p)
    assert horizon == math.ceil(40.0 / (1.0 - decay_rate(p)))
    for kind, constant in bs.CONSTANT_TERMS.items():
        value = bs.evaluate(kind, horizon, p)
        assert value - constant(p) <= 1e-6 * constant(p), f"{kind.value}: transitorio no despreciable"


def test_geometric_terms_do_not_underflow_to_nan():
    p = _anchor()
    values = bs.geometric_term(np.array([0, 10**7, 10**9]), p)
    assert np.all(np.isfinite(values))
    assert values[0] == 1.0


def test_bound_curve_pairs():
    curve = bound_curve("lse-lower", [0, 10, 1000], _anchor())
    assert [k for k, _ in curve.pairs()] == [0, 10, 1000]
    assert np.all(np.diff(curve.values) <= 0), "Con brecha nula la cota no crece"


def test_params_validate_from_json():
    payload = '{"alpha": 0.001, "beta": 1000, "gamma": 0.9, "d_min": 0.25, "d_max": 0.25, "n_pairs": 4, "n_actions": 2}'
    p = TypeAdapter(BoundParams).validate_json(payload)
    assert p == _anchor()


def test_autocorrelation_identity_and_single_step():
    n = 3
    x0 = np.eye(n)
    a = np.eye(n)
    zeros = [np.zeros((n, n))] * 5
    np.testing.assert_allclose(bs.propagate_autocorrelation(x0, a, zeros, 0.1, 5), x0)
    w = np.diag([1.0, 2.0, 3.0])
    step = bs.propagate_autocorrelation(np.zeros((n, n)), 0.5 * a, [w], 0.1, 1)
    np.testing.assert_allclose(step, 0.01 * w)


def test_autocorrelation_dimension_checks():
    with pytest.raises(DimensionMismatch):
        bs.propagate_autocorrelation(np.eye(2), np.eye(3), [np.eye(2)], 0.1, 1)
    with pytest.raises(DimensionMismatch):
        bs.propagate_autocorrelation(np.eye(2), np.eye(2), [], 0.1, 1)


def test_empirical_trace_stays_below_bound(mdp, q_star):
    mm = assemble_matrices(mdp, uniform_distribution(2, 2))
    alpha, beta = 0.01, 10.0
    op = SoftOperatorKind.lse(beta)
    model = SwitchingModel(mm, q_star, alpha)
    x0 = np.outer(-q_star.values, -q_star.values)
    w = noise_covariance(QTable.zeros(2, 2), op, mdp, mm)
    path = bs.autocorrelation_path(x0, model.fixed.A, [w] * 1000, alpha, 1000)
    p = BoundParams.from_model(mm, alpha, beta, QTable.zeros(2, 2), q_star)
    for k in (0, 10, 100, 1000):
        assert np.trace(path[k]) <= bs.trace_bound(k, p), f"tr(X_k) excede la cota en k={k}"
