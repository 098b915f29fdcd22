import math

import numpy as np
import pytest

from softq.models import SoftOperatorKind
from softq.models.mdp import validate_arrays
from softq.services import optimal_q, policy_enumeration_q, soft_fixed_point
from softq.services.solver_service import DEFAULT_TOL, bellman_residual, lse_fixed_point_gap_bound


def test_single_state_geometric_series(single_state_mdp):
    q = optimal_q(single_state_mdp)
    assert q.values[0] == pytest.approx(10.0, abs=1e-9)


def test_value_iteration_matches_policy_enumeration(mdp):
    vi = optimal_q(mdp)
    exact = policy_enumeration_q(mdp)
    np.testing.assert_allclose(vi.values, exact.values, atol=1e-9)
    assert bellman_residual(mdp, vi, SoftOperatorKind.hardmax()) <= 1e-9


def test_optimal_q_is_bounded(mdp, q_star):
    assert q_star.linf() <= mdp.max_abs_reward / (1.0 - mdp.discount) + 1e-9


@pytest.mark.parametrize("beta", [10.0, 100.0, 1000.0])
def test_lse_fixed_point_gap(mdp, q_star, beta):
    report = soft_fixed_point(mdp, SoftOperatorKind.lse(beta))
    assert report.converged
    assert not report.multiple_fixed_points, "El punto fijo LSE debe ser unico"
    gap = float(np.max(np.abs(report.q - q_star)))
    assert gap <= lse_fixed_point_gap_bound(mdp.discount, beta, mdp.n_actions) + 1e-9
    assert np.all(report.q.values >= q_star.values - 1e-9), "El punto fijo LSE domina a Q*"


@pytest.mark.parametrize("beta", [1.0, 10.0, 100.0, 1000.0])
def test_lse_probes_agree_on_single_fixed_point(mdp, beta):
    report = soft_fixed_point(mdp, SoftOperatorKind.lse(beta), n_probes=8)
    assert report.converged
    assert report.disagreement <= 2.0 * DEFAULT_TOL, f"Las sondas discrepan en {report.disagreement:.3e}"
    assert not report.multiple_fixed_points
    for _, witness in report.basin_witnesses:
        assert bellman_residual(mdp, witness, SoftOperatorKind.lse(beta)) <= DEFAULT_TOL


def test_gap_bound_reference_value():
    assert lse_fixed_point_gap_bound(0.9, 1000.0, 2) == pytest.approx(0.9 * math.log(2.0) / 100.0)
    assert lse_fixed_point_gap_bound(0.9, 1000.0, 2) == pytest.approx(0.00624, abs=1e-5)


def test_boltzmann_probes_are_reported(mdp):
    report = soft_fixed_point(mdp, SoftOperatorKind.boltzmann(10.0), n_probes=5, max_iter=20_000)
    assert len(report.basin_witnesses) == 5
    assert len(report.probe_converged) == 5
    for _, witness in report.basin_witnesses:
        assert witness.n_pairs == mdp.n_pairs
    if report.converged:
        assert bellman_residual(mdp, report.q, SoftOperatorKind.boltzmann(10.0)) <= 1e-8


def test_zero_discount_returns_rewards(mdp):
    myopic = validate_arrays(mdp.transition, mdp.reward, 0.0)
    q = optimal_q(myopic)
    np.testing.assert_allclose(q.values[0], 0.75)
