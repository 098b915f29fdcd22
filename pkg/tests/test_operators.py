import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softq.errors import EmptyActionSet, NonFiniteInput
from softq.models import QTable, SoftOperatorKind, operator_envelope, soft_backup, soft_value
from softq.models.operators import softmax_policy

values = st.lists(st.floats(-50.0, 50.0, allow_nan=False), min_size=1, max_size=6)
betas = st.floats(0.01, 1e4)


def test_lse_reference_values():
    assert soft_value(np.zeros(2), SoftOperatorKind.lse(1.0)) == pytest.approx(math.log(2.0))
    assert soft_value(np.array([1.0, 0.0]), SoftOperatorKind.lse(1.0)) == pytest.approx(1.313262, abs=1e-6)


def test_boltzmann_reference_values():
    assert soft_value(np.array([1.0, 0.0]), SoftOperatorKind.boltzmann(1.0)) == pytest.approx(0.731059, abs=1e-6)
    assert soft_value(np.full(3, 2.5), SoftOperatorKind.boltzmann(7.0)) == pytest.approx(2.5)


def test_envelope_reference_values():
    low, high = operator_envelope(np.array([1.0, 0.0]), SoftOperatorKind.lse(1.0))
    assert (low, high) == pytest.approx((1.0, 1.0 + math.log(2.0)))
    low, high = operator_envelope(np.array([1.0, 0.0]), SoftOperatorKind.boltzmann(1.0))
    assert (low, high) == pytest.approx((1.0 - math.log(2.0), 1.0))


@given(values, betas)
@settings(max_examples=300, deadline=None)
def test_lse_stays_inside_envelope(v, beta):
    op = SoftOperatorKind.lse(beta)
    low, high = operator_envelope(np.array(v), op)
    value = soft_value(np.array(v), op)
    tol = 1e-9 * max(1.0, abs(low))
    assert low - tol <= value <= high + tol, "LSE fuera de [max, max + ln|A|/beta]"


@given(values, betas)
@settings(max_examples=300, deadline=None)
def test_boltzmann_stays_inside_envelope(v, beta):
    op = SoftOperatorKind.boltzmann(beta)
    low, high = operator_envelope(np.array(v), op)
    value = soft_value(np.array(v), op)
    tol = 1e-9 * max(1.0, abs(high))
    assert low - tol <= value <= high + tol, "Boltzmann fuera de [max - ln|A|/beta, max]"


@given(values, betas, st.floats(-100.0, 100.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_translation_equivariance(v, beta, c):
    v = np.array(v)
    for op in (SoftOperatorKind.lse(beta), SoftOperatorKind.boltzmann(beta)):
        shifted = soft_value(v + c, op)
        assert shifted == pytest.approx(soft_value(v, op) + c, abs=1e-8 * (1.0 + abs(c) + np.abs(v).max()))


def test_huge_beta_is_finite_and_close_to_max():
    v = np.array([3.0, 2.999, -4.0])
    for op in (SoftOperatorKind.lse(1e6), SoftOperatorKind.boltzmann(1e6)):
        value = soft_value(v, op)
        assert math.isfinite(value), "beta grande no debe producir NaN ni inf"
        assert abs(value - 3.0) <= math.log(3.0) / 1e6 + 1e-12


def test_empty_and_non_finite_inputs():
    with pytest.raises(EmptyActionSet):
        soft_value(np.array([]), SoftOperatorKind.lse(1.0))
    with pytest.raises(NonFiniteInput):
        soft_value(np.array([1.0, np.nan]), SoftOperatorKind.boltzmann(1.0))


def test_non_positive_beta_is_rejected():
    with pytest.raises(ValueError):
        SoftOperatorKind.lse(0.0)


def test_soft_backup_per_state():
    q = QTable.from_matrix(np.array([[1.0, 0.0], [2.0, 2.0]]))
    backup = soft_backup(q, SoftOperatorKind.hardmax())
    np.testing.assert_allclose(backup, [1.0, 2.0])


def test_softmax_policy_rows():
    q = QTable.from_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    policy = softmax_policy(q)
    np.testing.assert_allclose(policy.probs[0], [0.5, 0.5])
    assert policy.probs[1, 0] == pytest.approx(0.731059, abs=1e-6)


BETA_GRID = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 1e4, 1e6]


@given(values)
@settings(max_examples=200, deadline=None)
def test_lse_is_nonincreasing_in_beta(v):
    curve = [soft_value(np.array(v), SoftOperatorKind.lse(beta)) for beta in BETA_GRID]
    for previous, current in zip(curve, curve[1:]):
        assert current <= previous + 1e-9, f"LSE debe decrecer con beta: {curve}"


@given(values)
@settings(max_examples=200, deadline=None)
def test_boltzmann_is_nondecreasing_in_beta(v):
    curve = [soft_value(np.array(v), SoftOperatorKind.boltzmann(beta)) for beta in BETA_GRID]
    for previous, current in zip(curve, curve[1:]):
        assert current >= previous - 1e-9, f"Boltzmann debe crecer con beta: {curve}"


@pytest.mark.parametrize(
    "kind,expected_order",
    [("lse", "decreasing"), ("boltzmann", "increasing")],
)
def test_beta_grid_is_strictly_monotone_on_distinct_values(kind, expected_order):
    v = np.array([1.0, 0.0, -0.5])
    curve = [soft_value(v, SoftOperatorKind(kind, beta)) for beta in [0.1, 1.0, 10.0]]
    ordered = sorted(curve, reverse=expected_order == "decreasing")
    assert curve == ordered
    assert len(set(curve)) == 3
