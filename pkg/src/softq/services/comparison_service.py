"""Sistemas de conmutacion y sistemas de comparacion inferior/superior/error.

Todas las trayectorias se expresan como desviaciones x = Q - Q*. El
aprendiz y los sistemas de comparacion consumen el mismo ruido w_k en
cada paso.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..connectors.random_streams import make_stream
from ..connectors.samplers import IidSampling, build_sampler
from ..errors import SandwichViolation
from ..models.matrices import ModelMatrices, assemble_matrices, greedy_actions, policy_matrix
from ..models.mdp import StochasticPolicy, TabularMdp
from ..models.operators import OperatorName, SoftOperatorKind
from ..models.qtable import QTable
from ..models.trace import SANDWICH_SLACK, CoupledTrace
from .learner_service import LearnerConfig, noise_vector, td_update

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, eq=False)
class SwitchingMatrices:
    """A_Q = I + alpha (gamma D P Pi_Q - D) y b_Q = alpha gamma D P (Pi_Q - Pi_Q*) Q*."""

    A: np.ndarray
    b: np.ndarray

    def infinity_norm(self) -> float:
        return float(np.max(np.sum(np.abs(self.A), axis=1)))


def _selector(actions: np.ndarray, n_actions: int) -> np.ndarray:
    return policy_matrix(StochasticPolicy.deterministic(actions, n_actions))


def switching_matrices(
    q: QTable, q_star: QTable, mm: ModelMatrices, alpha: float, gamma: float
) -> SwitchingMatrices:
    pi_q = _selector(greedy_actions(q), mm.n_actions)
    pi_star = _selector(greedy_actions(q_star), mm.n_actions)
    A = np.eye(mm.n_pairs) + alpha * (gamma * mm.DP @ pi_q - mm.D)
    b = alpha * gamma * mm.DP @ ((pi_q - pi_star) @ q_star.values)
    return SwitchingMatrices(A=A, b=b)


def soft_bias(op: SoftOperatorKind, mm: ModelMatrices, alpha: float) -> np.ndarray:
    """alpha gamma D P (ln|A| / beta) 1."""
    offset = np.full(mm.n_states, op.bias(mm.n_actions))
    return alpha * mm.discount * (mm.DP @ offset)


class SwitchingModel:
    """A_Q por senal de conmutacion (accion voraz por estado), con cache."""

    def __init__(self, mm: ModelMatrices, q_star: QTable, alpha: float) -> None:
        self.mm = mm
        self.q_star = q_star
        self.alpha = alpha
        self._cache: Dict[Tuple[int, ...], SwitchingMatrices] = {}
        self.fixed = self.matrices(q_star)

    def matrices(self, q: QTable) -> SwitchingMatrices:
        signal = tuple(int(a) for a in greedy_actions(q))
        cached = self._cache.get(signal)
        if cached is None:
            cached = switching_matrices(q, self.q_star, self.mm, self.alpha, self.mm.discount)
            self._cache[signal] = cached
        return cached


def affine_switching_step(
    x: np.ndarray, q: QTable, mm: ModelMatrices, q_star: QTable, alpha: float, w: np.ndarray
) -> np.ndarray:
    """Q_{k+1} - Q* = A_Q x + b_Q + alpha w (forma de Q-learning con max)."""
    sm = switching_matrices(q, q_star, mm, alpha, mm.discount)
    return sm.A @ x + sm.b + alpha * w


def lower_step(
    op: SoftOperatorKind,
    x: np.ndarray,
    w: np.ndarray,
    fixed: SwitchingMatrices,
    alpha: float,
    mm: ModelMatrices,
) -> np.ndarray:
    """Sistema lineal inferior; Boltzmann resta el sesgo ln|A|/beta."""
    nxt = fixed.A @ x + alpha * w
    if op.kind is OperatorName.BOLTZMANN:
        nxt = nxt - soft_bias(op, mm, alpha)
    return nxt


def upper_step(
    op: SoftOperatorKind,
    x: np.ndarray,
    q_learner: QTable,
    w: np.ndarray,
    alpha: float,
    mm: ModelMatrices,
    q_star: QTable,
    model: Optional[SwitchingModel] = None,
) -> np.ndarray:
    """Sistema de conmutacion superior con A reconstruida en el iterado del aprendiz."""
    current = model.matrices(q_learner) if model else switching_matrices(q_learner, q_star, mm, alpha, mm.discount)
    nxt = current.A @ x + alpha * w
    if op.kind is OperatorName.LSE:
        nxt = nxt + soft_bias(op, mm, alpha)
    return nxt


def error_step(
    op: SoftOperatorKind,
    e: np.ndarray,
    x_lower: np.ndarray,
    q_learner: QTable,
    alpha: float,
    mm: ModelMatrices,
    q_star: QTable,
    model: Optional[SwitchingModel] = None,
) -> np.ndarray:
    """e' = A_Qk e + (A_Qk - A_Q*) x_lower + alpha gamma D P (ln|A|/beta) 1, sin ruido."""
    model = model or SwitchingModel(mm, q_star, alpha)
    current = model.matrices(q_learner)
    switching = current.A - model.fixed.A
    return current.A @ e + switching @ x_lower + soft_bias(op, mm, alpha)


def co_simulate(
    cfg: LearnerConfig,
    mdp: TabularMdp,
    q_star: QTable,
    rng: Optional[np.random.Generator] = None,
    slack: float = SANDWICH_SLACK,
    raise_on_violation: bool = False,
    model_d: Optional[np.ndarray] = None,
) -> CoupledTrace:
    """Avanza aprendiz y sistemas de comparacion con el mismo ruido en cada paso.

    Con muestreo por trayectorias hay que pasar model_d explicitamente; esa
    corrida es exploratoria y el orden no esta garantizado.
    """
    cfg.validate(mdp)
    if isinstance(cfg.sampling, IidSampling):
        d = cfg.sampling.d
    elif model_d is not None:
        d = model_d
        logger.warning("Co-simulacion exploratoria fuera del modelo i.i.d.")
    else:
        raise ValueError("La co-simulacion requiere muestreo i.i.d. (o model_d en modo exploratorio)")
    rng = rng if rng is not None else make_stream(cfg.seed)
    sampler = build_sampler(cfg.sampling, mdp, rng)
    mm = assemble_matrices(mdp, d)
    model = SwitchingModel(mm, q_star, cfg.alpha)
    op, alpha, n = cfg.op, cfg.alpha, cfg.n_steps
    n_states = mdp.n_states

    values = cfg.initial_q(mdp).values.copy()
    x_learner = np.empty((n + 1, mdp.n_pairs))
    x_lower = np.empty_like(x_learner)
    x_upper = np.empty_like(x_learner)
    error = np.empty_like(x_learner)
    noise = np.empty((n, mdp.n_pairs))
    x_learner[0] = values - q_star.values
    x_lower[0] = x_learner[0]
    x_upper[0] = x_learner[0]
    error[0] = 0.0

    for k in range(n):
        q_k = QTable(values, n_states, mdp.n_actions)
        t = sampler.sample(values)
        w = noise_vector(values, n_states, t, op, mm)
        noise[k] = w
        td_update(values, n_states, t, op, alpha, mdp.discount)
        x_learner[k + 1] = values - q_star.values
        x_upper[k + 1] = upper_step(op, x_upper[k], q_k, w, alpha, mm, q_star, model)
        error[k + 1] = error_step(op, error[k], x_lower[k], q_k, alpha, mm, q_star, model)
        x_lower[k + 1] = lower_step(op, x_lower[k], w, model.fixed, alpha, mm)

    lower_ok = np.all(x_learner - x_lower >= -slack, axis=1)
    upper_ok = np.all(x_upper - x_learner >= -slack, axis=1)
    violations = [int(k) for k in np.flatnonzero(~(lower_ok & upper_ok))]
    if violations:
        logger.warning(
            "%s: orden inferior/superior violado en %s pasos (primero %s)",
            op.label(),
            len(violations),
            violations[0],
        )
        if raise_on_violation:
            raise SandwichViolation(f"Orden violado en el paso {violations[0]}")
    return CoupledTrace(
        op=op,
        alpha=alpha,
        seed=cfg.seed,
        q_star=q_star,
        x_learner=x_learner,
        x_lower=x_lower,
        x_upper=x_upper,
        error_system=error,
        noise=noise,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        slack=slack,
        violations=violations,
    )


__all__ = [
    "SwitchingMatrices",
    "SwitchingModel",
    "affine_switching_step",
    "co_simulate",
    "error_step",
    "lower_step",
    "soft_bias",
    "switching_matrices",
    "upper_step",
]
