"""Matrices P, R, D y Pi del modelo en el orden de QTable."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NegativeProbability, NonStochasticRow, ZeroVisitProbability
from .mdp import StochasticPolicy, TabularMdp
from .qtable import QTable

DISTRIBUTION_TOLERANCE = 1e-10


@dataclass(frozen=True, slots=True, eq=False)
class ModelMatrices:
    """Matrices apiladas (D, P, R, Pi) para una distribucion d fija."""

    P: np.ndarray
    R: np.ndarray
    D: np.ndarray
    d: np.ndarray
    d_min: float
    d_max: float
    n_states: int
    n_actions: int
    discount: float

    @property
    def n_pairs(self) -> int:
        return self.n_states * self.n_actions

    @property
    def DP(self) -> np.ndarray:
        return self.d[:, None] * self.P

    @property
    def DR(self) -> np.ndarray:
        return self.d * self.R


def uniform_distribution(n_states: int, n_actions: int) -> np.ndarray:
    return np.full(n_states * n_actions, 1.0 / (n_states * n_actions))


def check_distribution(d: np.ndarray, n_pairs: int) -> np.ndarray:
    d = np.array(d, dtype=np.float64).reshape(-1)
    if d.size != n_pairs:
        raise DimensionMismatch(f"d debe tener {n_pairs} entradas, tiene {d.size}")
    if np.any(d <= 0):
        raise ZeroVisitProbability(
            f"d(s,a) debe ser estrictamente positiva; minimo {d.min():.3e}"
        )
    if abs(d.sum() - 1.0) > DISTRIBUTION_TOLERANCE:
        raise NonStochasticRow(f"d no suma 1 (suma {d.sum():.15g})")
    return d


def assemble_matrices(mdp: TabularMdp, d: np.ndarray) -> ModelMatrices:
    d = check_distribution(d, mdp.n_pairs)
    P = mdp.transition.reshape(mdp.n_pairs, mdp.n_states).copy()
    R = np.einsum("ast,sat->as", mdp.transition, mdp.reward).reshape(-1)
    D = np.diag(d)
    for array in (P, R, D, d):
        array.setflags(write=False)
    return ModelMatrices(
        P=P,
        R=R,
        D=D,
        d=d,
        d_min=float(d.min()),
        d_max=float(d.max()),
        n_states=mdp.n_states,
        n_actions=mdp.n_actions,
        discount=mdp.discount,
    )


def policy_matrix(policy: StochasticPolicy) -> np.ndarray:
    """Pi^pi: la fila s es pi(s)^T kron e_s^T."""
    n_states, n_actions = policy.probs.shape
    pi = np.zeros((n_states, n_states * n_actions))
    states = np.arange(n_states)
    for a in range(n_actions):
        pi[states, a * n_states + states] = policy.probs[:, a]
    return pi


def greedy_actions(q: QTable) -> np.ndarray:
    # np.argmax devuelve el primer maximo: desempate por menor accion
    return np.argmax(q.matrix(), axis=1)


def greedy_selector(q: QTable) -> np.ndarray:
    """Pi_Q^max; Pi_Q^max @ q es el maximo por estado."""
    return policy_matrix(StochasticPolicy.deterministic(greedy_actions(q), q.n_actions))


def state_action_chain(mdp: TabularMdp, policy: StochasticPolicy) -> np.ndarray:
    """Matriz de transicion P Pi^pi sobre pares estado-accion."""
    return mdp.transition.reshape(mdp.n_pairs, mdp.n_states) @ policy_matrix(policy)


def induced_state_chain(mdp: TabularMdp, policy: StochasticPolicy) -> np.ndarray:
    """M[s, s'] = sum_a pi(a|s) P_a(s, s')."""
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise DimensionMismatch("La politica no coincide con las dimensiones del MDP")
    return np.einsum("sa,ast->st", policy.probs, mdp.transition)


def pair_distribution(state_probs: np.ndarray, policy: StochasticPolicy) -> np.ndarray:
    """d(s, a) = p(s) pi(a|s) en el orden de QTable."""
    state_probs = np.asarray(state_probs, dtype=np.float64)
    if np.any(state_probs < 0):
        raise NegativeProbability("p(s) contiene valores negativos")
    return (state_probs[:, None] * policy.probs).T.reshape(-1)


__all__ = [
    "ModelMatrices",
    "assemble_matrices",
    "check_distribution",
    "greedy_actions",
    "greedy_selector",
    "induced_state_chain",
    "pair_distribution",
    "policy_matrix",
    "state_action_chain",
    "uniform_distribution",
]
