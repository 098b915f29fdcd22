"""Distribucion estacionaria estado-accion bajo una politica de comportamiento."""
from __future__ import annotations

import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import NotConverged, Reducible, ZeroVisitProbability
from .matrices import induced_state_chain, pair_distribution
from .mdp import StochasticPolicy, TabularMdp

logger = logging.getLogger(__name__)

POWER_ITERATION_CAP = 1_000_000
LINEAR_SOLVE_MAX_STATES = 64


def recurrent_classes(chain: np.ndarray) -> list[np.ndarray]:
    """Clases comunicantes cerradas de la cadena."""
    graph = csr_matrix(chain > 0)
    n_classes, labels = connected_components(graph, directed=True, connection="strong")
    closed = []
    for label in range(n_classes):
        members = np.flatnonzero(labels == label)
        outside = np.flatnonzero(labels != label)
        if not np.any(chain[np.ix_(members, outside)] > 0):
            closed.append(members)
    return closed


def _solve_stationary(chain: np.ndarray) -> np.ndarray:
    n = chain.shape[0]
    system = np.vstack([chain.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    p, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def stationary_states(
    chain: np.ndarray, tol: float = 1e-12, max_iter: int = POWER_ITERATION_CAP
) -> np.ndarray:
    n = chain.shape[0]
    closed = recurrent_classes(chain)
    if len(closed) > 1:
        raise Reducible(f"La cadena tiene {len(closed)} clases recurrentes")
    p = np.full(n, 1.0 / n)
    for iteration in range(1, max_iter + 1):
        p_next = p @ chain
        change = np.max(np.abs(p_next - p))
        p = p_next
        if change <= tol:
            logger.debug("Iteracion de potencia convergio en %s pasos", iteration)
            return p / p.sum()
    if n <= LINEAR_SOLVE_MAX_STATES:
        logger.warning(
            "Iteracion de potencia sin convergencia tras %s pasos; se usa solucion lineal",
            max_iter,
        )
        p = _solve_stationary(chain)
        residual = np.max(np.abs(p @ chain - p))
        if residual <= max(tol, 1e-10):
            return p
    raise NotConverged(f"Distribucion estacionaria sin convergencia tras {max_iter} pasos")


def stationary_state_action(
    mdp: TabularMdp,
    policy: StochasticPolicy,
    tol: float = 1e-12,
    max_iter: int = POWER_ITERATION_CAP,
) -> np.ndarray:
    """d(s, a) = p(s) pi(a|s) con p estacionaria de la cadena de estados."""
    chain = induced_state_chain(mdp, policy)
    p = stationary_states(chain, tol=tol, max_iter=max_iter)
    return pair_distribution(p, policy)


def empirical_distribution(
    states: np.ndarray, actions: np.ndarray, n_states: int, n_actions: int
) -> np.ndarray:
    """Frecuencias de visita por par en el orden de QTable."""
    counts = np.bincount(
        np.asarray(actions) * n_states + np.asarray(states), minlength=n_states * n_actions
    ).astype(np.float64)
    if counts.sum() == 0:
        raise ZeroVisitProbability("No hay visitas registradas")
    return counts / counts.sum()


__all__ = [
    "empirical_distribution",
    "recurrent_classes",
    "stationary_state_action",
    "stationary_states",
]
