"""Soluciones exactas: Q*, puntos fijos de los operadores suaves y residuos de Bellman."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..connectors.random_streams import make_stream
from ..errors import NotConverged
from ..models.matrices import policy_matrix
from ..models.mdp import StochasticPolicy, TabularMdp
from ..models.operators import SoftOperatorKind, soft_values
from ..models.qtable import QTable

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
POLICY_ENUMERATION_LIMIT = 100_000


@dataclass(slots=True, eq=False)
class FixedPointReport:
    """Resultado de iterar Q <- R + gamma P H(Q) desde varias inicializaciones."""

    q: QTable
    converged: bool
    iterations: int
    residual: float
    basin_witnesses: List[Tuple[int, QTable]] = field(default_factory=list)
    probe_converged: List[bool] = field(default_factory=list)
    disagreement: float = 0.0
    multiple_fixed_points: bool = False


def model_vectors(mdp: TabularMdp) -> Tuple[np.ndarray, np.ndarray]:
    """P apilada (|S||A| x |S|) y R esperada en el orden de QTable."""
    P = mdp.transition.reshape(mdp.n_pairs, mdp.n_states)
    R = np.einsum("ast,sat->as", mdp.transition, mdp.reward).reshape(-1)
    return P, R


def _backup(values: np.ndarray, mdp: TabularMdp, op: SoftOperatorKind) -> np.ndarray:
    return soft_values(values.reshape(mdp.n_actions, mdp.n_states).T, op)


def bellman_operator(mdp: TabularMdp, values: np.ndarray, op: SoftOperatorKind) -> np.ndarray:
    """R + gamma P H(Q) sobre el vector plano."""
    P, R = model_vectors(mdp)
    return R + mdp.discount * (P @ _backup(values, mdp, op))


def optimal_q(mdp: TabularMdp, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> QTable:
    """Iteracion de valor con criterio de parada que garantiza ||Q - Q*|| <= tol."""
    P, R = model_vectors(mdp)
    gamma = mdp.discount
    values = np.zeros(mdp.n_pairs)
    if gamma == 0.0:
        return QTable(R, mdp.n_states, mdp.n_actions)
    threshold = tol * (1.0 - gamma) / gamma
    for iteration in range(1, max_iter + 1):
        state_max = values.reshape(mdp.n_actions, mdp.n_states).max(axis=0)
        updated = R + gamma * (P @ state_max)
        change = np.max(np.abs(updated - values))
        values = updated
        if change <= threshold:
            logger.debug("Iteracion de valor convergio en %s pasos (cambio %.3e)", iteration, change)
            return QTable(values, mdp.n_states, mdp.n_actions)
    raise NotConverged(f"Iteracion de valor sin convergencia tras {max_iter} pasos")


def policy_enumeration_q(mdp: TabularMdp) -> QTable:
    """Q* exacta enumerando politicas deterministas y resolviendo cada sistema lineal."""
    n_policies = mdp.n_actions ** mdp.n_states
    if n_policies > POLICY_ENUMERATION_LIMIT:
        raise ValueError(f"Demasiadas politicas para enumerar ({n_policies})")
    P, R = model_vectors(mdp)
    identity = np.eye(mdp.n_pairs)
    best = np.full(mdp.n_pairs, -np.inf)
    for actions in itertools.product(range(mdp.n_actions), repeat=mdp.n_states):
        pi = policy_matrix(StochasticPolicy.deterministic(actions, mdp.n_actions))
        q_pi = np.linalg.solve(identity - mdp.discount * P @ pi, R)
        best = np.maximum(best, q_pi)
    return QTable(best, mdp.n_states, mdp.n_actions)


def _probe_starts(mdp: TabularMdp, n_probes: int, seed: int) -> List[np.ndarray]:
    box = 1.0 / (1.0 - mdp.discount)
    starts = [np.zeros(mdp.n_pairs), np.full(mdp.n_pairs, box), np.full(mdp.n_pairs, -box)]
    rng = make_stream(seed, "fixed-point-probes")
    while len(starts) < n_probes:
        starts.append(rng.uniform(-box, box, size=mdp.n_pairs))
    return starts[:n_probes]


def _iterate(
    mdp: TabularMdp, op: SoftOperatorKind, start: np.ndarray, tol: float, max_iter: int
) -> Tuple[np.ndarray, bool, int, float]:
    values = start
    change = np.inf
    # cambio <= tol (1 - gamma) / gamma deja cada sonda a tol del punto fijo si H contrae
    threshold = tol * (1.0 - mdp.discount) / mdp.discount if mdp.discount > 0.0 else tol
    for iteration in range(1, max_iter + 1):
        updated = bellman_operator(mdp, values, op)
        change = float(np.max(np.abs(updated - values)))
        values = updated
        if change <= threshold:
            return values, True, iteration, change
    return values, False, max_iter, change


def soft_fixed_point(
    mdp: TabularMdp,
    op: SoftOperatorKind,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    n_probes: int = 3,
    seed: int = 0,
) -> FixedPointReport:
    """Itera el operador suave desde n_probes inicios y compara los limites."""
    if n_probes < 1:
        raise ValueError("n_probes debe ser >= 1")
    witnesses: List[Tuple[int, QTable]] = []
    flags: List[bool] = []
    iterations = 0
    residual = 0.0
    for probe_id, start in enumerate(_probe_starts(mdp, n_probes, seed)):
        limit, converged, used, change = _iterate(mdp, op, start, tol, max_iter)
        if not converged:
            logger.warning(
                "Sonda %s de %s sin convergencia (cambio %.3e)", probe_id, op.label(), change
            )
        logger.debug("Sonda %s: %s iteraciones, cambio %.3e", probe_id, used, change)
        witnesses.append((probe_id, QTable(limit, mdp.n_states, mdp.n_actions)))
        flags.append(converged)
        iterations = max(iterations, used)
        residual = max(residual, change)
    limits = np.array([q.values for _, q in witnesses])
    disagreement = float(np.max(np.ptp(limits, axis=0))) if len(limits) > 1 else 0.0
    multiple = disagreement > 10.0 * tol
    if multiple:
        logger.info("%s: las sondas discrepan en %.3e", op.label(), disagreement)
    return FixedPointReport(
        q=witnesses[0][1],
        converged=all(flags),
        iterations=iterations,
        residual=residual,
        basin_witnesses=witnesses,
        probe_converged=flags,
        disagreement=disagreement,
        multiple_fixed_points=multiple,
    )


def bellman_residual(mdp: TabularMdp, q: QTable, op: SoftOperatorKind) -> float:
    return float(np.max(np.abs(q.values - bellman_operator(mdp, q.values, op))))


def lse_fixed_point_gap_bound(gamma: float, beta: float, n_actions: int) -> float:
    """gamma ln|A| / (beta (1 - gamma)): distancia maxima entre el punto fijo LSE y Q*."""
    return gamma * np.log(n_actions) / (beta * (1.0 - gamma))


__all__ = [
    "FixedPointReport",
    "bellman_operator",
    "bellman_residual",
    "lse_fixed_point_gap_bound",
    "model_vectors",
    "optimal_q",
    "policy_enumeration_q",
    "soft_fixed_point",
]
