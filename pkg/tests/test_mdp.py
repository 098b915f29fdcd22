import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softq.errors import (
    ConfigParseError,
    IndexOutOfRange,
    InvalidDiscount,
    InvalidMdpError,
    NonStochasticRow,
    NotConverged,
    Reducible,
    RewardOutOfBounds,
    ZeroVisitProbability,
)
from softq.models import (
    QTable,
    StochasticPolicy,
    assemble_matrices,
    build_mdp,
    flat_index,
    greedy_selector,
    policy_matrix,
    stationary_state_action,
    uniform_distribution,
)
from softq.models.distribution import empirical_distribution, stationary_states
from softq.models.matrices import induced_state_chain
from softq.models.mdp import dump_mdp_file, load_mdp_file, parse_mdp_text, two_state_spec, validate_arrays


def test_two_state_mdp_is_valid(mdp):
    assert (mdp.n_states, mdp.n_actions) == (2, 2)
    assert mdp.discount == 0.9
    np.testing.assert_allclose(mdp.transition.sum(axis=2), 1.0)
    np.testing.assert_allclose(mdp.initial_distribution, [0.8, 0.2])


def test_single_state_mdp_is_valid(single_state_mdp):
    assert single_state_mdp.n_pairs == 1


def test_non_stochastic_row_is_rejected():
    spec = two_state_spec().model_dump()
    spec["transitions"][0][0] = [0.5, 0.6]
    with pytest.raises(NonStochasticRow):
        build_mdp(spec)


def test_reward_bound_only_in_strict_mode():
    spec = two_state_spec().model_dump()
    spec["rewards"].append((2, 2, 2, 3.0))
    with pytest.raises(RewardOutOfBounds):
        build_mdp(spec)
    relaxed = build_mdp(spec, strict=False)
    assert relaxed.max_abs_reward == 3.0


def test_discount_outside_unit_interval():
    spec = two_state_spec().model_dump()
    spec["discount"] = 1.0
    with pytest.raises(InvalidDiscount):
        build_mdp(spec)


def test_reward_index_is_one_based():
    spec = two_state_spec().model_dump()
    spec["rewards"].append((3, 1, 1, 0.1))
    with pytest.raises(IndexOutOfRange):
        build_mdp(spec)


@pytest.mark.parametrize(
    "s,a,expected",
    [(0, 0, 0), (1, 1, 3), (0, 1, 2), (1, 0, 1)],
)
def test_flat_index_is_action_major(s, a, expected):
    assert flat_index(s, a, 2, 2) == expected


def test_flat_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        flat_index(2, 0, 2, 2)


def test_uniform_distribution_matrices(mdp):
    mm = assemble_matrices(mdp, uniform_distribution(2, 2))
    assert mm.d_min == mm.d_max == 0.25
    assert mm.R[0] == pytest.approx(0.75), "R(s=1, a=1) deberia ser 0.5*0.5 + 0.5*1"
    np.testing.assert_allclose(mm.P.sum(axis=1), 1.0)
    np.testing.assert_allclose(np.trace(mm.D), 1.0)


def test_zero_visit_probability_is_rejected(mdp):
    with pytest.raises(ZeroVisitProbability):
        assemble_matrices(mdp, np.array([0.5, 0.5, 0.0, 0.0]))


def test_policy_matrix_rows_sum_to_one():
    policy = StochasticPolicy(np.array([[0.3, 0.7], [1.0, 0.0]]))
    pi = policy_matrix(policy)
    assert pi.shape == (2, 4)
    np.testing.assert_allclose(pi.sum(axis=1), 1.0)
    assert pi[0, 2] == pytest.approx(0.7)


def test_greedy_selector_ties_and_strict_max():
    ties = QTable.zeros(1, 2)
    assert greedy_selector(ties)[0].tolist() == [1.0, 0.0], "Empate: debe elegirse la accion 0"
    q = QTable.from_matrix(np.array([[1.0, 2.0]]))
    assert greedy_selector(q)[0].tolist() == [0.0, 1.0]
    np.testing.assert_allclose(greedy_selector(q) @ q.values, [2.0])


def test_invalid_policy_rows():
    with pytest.raises(InvalidMdpError):
        StochasticPolicy(np.array([[0.6, 0.6]]))


def test_stationary_distribution_matches_linear_solve(mdp):
    policy = StochasticPolicy.uniform(2, 2)
    d = stationary_state_action(mdp, policy)
    chain = induced_state_chain(mdp, policy)
    system = np.vstack([chain.T - np.eye(2), np.ones((1, 2))])
    p, *_ = np.linalg.lstsq(system, np.array([0.0, 0.0, 1.0]), rcond=None)
    np.testing.assert_allclose(d.sum(), 1.0)
    np.testing.assert_allclose(stationary_states(chain), p, atol=1e-10)
    np.testing.assert_allclose(d[:2], 0.5 * p, atol=1e-10)


def test_empirical_distribution_counts():
    d = empirical_distribution(np.array([0, 1, 1, 0]), np.array([0, 0, 1, 0]), 2, 2)
    np.testing.assert_allclose(d, [0.5, 0.25, 0.0, 0.25])


def test_mdp_file_round_trip(tmp_path, mdp):
    path = dump_mdp_file(mdp, tmp_path / "two_state.json")
    loaded = load_mdp_file(path)
    np.testing.assert_array_equal(loaded.transition, mdp.transition)
    np.testing.assert_array_equal(loaded.reward, mdp.reward)
    assert loaded.discount == mdp.discount


def test_malformed_mdp_file_reports_line():
    with pytest.raises(ConfigParseError) as info:
        parse_mdp_text('{\n  "n_states": 2,\n  oops\n}')
    assert info.value.line == 3


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_transition_is_rejected(bad):
    spec = two_state_spec().model_dump()
    spec["transitions"][0][0] = [bad, 0.5]
    with pytest.raises(NonStochasticRow):
        build_mdp(spec)


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_non_finite_initial_distribution_is_rejected(bad):
    spec = two_state_spec().model_dump()
    spec["initial_distribution"] = [bad, 0.2]
    with pytest.raises(NonStochasticRow):
        build_mdp(spec)


def test_mdp_file_with_nan_is_rejected():
    spec = two_state_spec().model_dump()
    spec["transitions"][1][1] = [float("nan"), 0.7]
    text = json.dumps(spec, indent=2)
    assert "NaN" in text
    with pytest.raises(InvalidMdpError):
        parse_mdp_text(text)


def test_single_state_distribution_follows_policy():
    one_state = validate_arrays(np.ones((2, 1, 1)), np.zeros((1, 2, 1)), 0.9)
    policy = StochasticPolicy(np.array([[0.3, 0.7]]))
    np.testing.assert_allclose(stationary_state_action(one_state, policy), [0.3, 0.7])


def test_doubly_stochastic_chain_has_uniform_distribution():
    mixing = np.array([[0.2, 0.5, 0.3], [0.5, 0.3, 0.2], [0.3, 0.2, 0.5]])
    transition = np.stack([mixing, np.eye(3)])
    chain_mdp = validate_arrays(transition, np.zeros((3, 2, 3)), 0.9)
    d = stationary_state_action(chain_mdp, StochasticPolicy.uniform(3, 2))
    np.testing.assert_allclose(d, np.full(6, 1.0 / 6.0), atol=1e-10)


def test_two_absorbing_states_are_reducible():
    absorbing = validate_arrays(np.eye(2)[None, :, :], np.zeros((2, 1, 2)), 0.9)
    with pytest.raises(Reducible):
        stationary_state_action(absorbing, StochasticPolicy.uniform(2, 1))


def test_power_iteration_cap_raises_not_converged():
    n = 65
    rng = np.random.default_rng(3)
    rows = rng.dirichlet(np.ones(n), size=n)
    large = validate_arrays(rows[None, :, :], np.zeros((n, 1, n)), 0.9)
    with pytest.raises(NotConverged):
        stationary_state_action(large, StochasticPolicy.uniform(n, 1), max_iter=1)


q_entries = st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=12, max_size=12)


@given(q_entries)
@settings(max_examples=200, deadline=None)
def test_greedy_selector_matches_brute_force_max(entries):
    q = QTable(np.array(entries), 3, 4)
    brute = [max(entries[a * 3 + s] for a in range(4)) for s in range(3)]
    np.testing.assert_array_equal(greedy_selector(q) @ q.values, brute)


@given(q_entries, st.lists(st.floats(0.01, 1.0), min_size=12, max_size=12))
@settings(max_examples=200, deadline=None)
def test_greedy_selector_dominates_any_policy(entries, weights):
    q = QTable(np.array(entries), 3, 4)
    raw = np.array(weights).reshape(3, 4)
    policy = StochasticPolicy(raw / raw.sum(axis=1, keepdims=True))
    greedy = greedy_selector(q) @ q.values
    assert np.all(greedy >= policy_matrix(policy) @ q.values - 1e-12), "El selector voraz debe dominar"
