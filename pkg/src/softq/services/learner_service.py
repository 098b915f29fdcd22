"""Algoritmo de soft Q-learning (LSE, Boltzmann o max) y su ruido realizado."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..connectors.random_streams import make_stream
from ..connectors.samplers import IidSampling, SamplingMode, TransitionSampler, build_sampler
from ..errors import AssumptionViolation, DimensionMismatch, DistributionMismatch
from ..models.matrices import ModelMatrices, assemble_matrices
from ..models.mdp import TabularMdp
from ..models.operators import SoftOperatorKind, soft_backup, soft_values
from ..models.qtable import QTable
from ..models.trace import LearnerTrace, NoiseVector, Transition

logger = logging.getLogger(__name__)

DENSE_SNAPSHOT_STEPS = 10_000
SNAPSHOT_STRIDE = 100
TAIL_FRACTION = 0.01


@dataclass(frozen=True, slots=True, eq=False)
class LearnerConfig:
    """Parametros de una corrida del algoritmo."""

    op: SoftOperatorKind
    alpha: float
    n_steps: int
    sampling: SamplingMode
    seed: int = 0
    q0: Optional[QTable] = None
    strict: bool = True
    record_noise: bool = False
    dense_snapshot_steps: int = DENSE_SNAPSHOT_STEPS
    snapshot_stride: int = SNAPSHOT_STRIDE

    def initial_q(self, mdp: TabularMdp) -> QTable:
        if self.q0 is None:
            return QTable.zeros(mdp.n_states, mdp.n_actions)
        return self.q0

    def validate(self, mdp: TabularMdp) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise AssumptionViolation(f"alpha={self.alpha} fuera de (0, 1)")
        if self.n_steps < 0:
            raise ValueError("n_steps debe ser >= 0")
        q0 = self.initial_q(mdp)
        if (q0.n_states, q0.n_actions) != (mdp.n_states, mdp.n_actions):
            raise DimensionMismatch("q0 no coincide con las dimensiones del MDP")
        if self.strict and q0.linf() > 1.0:
            raise AssumptionViolation("||q0||_inf > 1 en modo estricto")
        if self.record_noise and not isinstance(self.sampling, IidSampling):
            raise ValueError("El ruido realizado solo se define con muestreo i.i.d.")


def td_update(
    values: np.ndarray,
    n_states: int,
    t: Transition,
    op: SoftOperatorKind,
    alpha: float,
    gamma: float,
) -> None:
    """Actualiza en el lugar la entrada (t.s, t.a) del vector plano."""
    index = t.a * n_states + t.s
    target = t.r + gamma * float(soft_values(values[t.s_next :: n_states], op))
    values[index] = values[index] + alpha * (target - values[index])


def step(q: QTable, t: Transition, op: SoftOperatorKind, alpha: float, gamma: float) -> QTable:
    """Q(s, a) += alpha (r + gamma h(Q(s', .)) - Q(s, a)); el resto queda intacto."""
    values = q.values.copy()
    td_update(values, q.n_states, t, op, alpha, gamma)
    return QTable(values, q.n_states, q.n_actions)


def _mean_direction(values: np.ndarray, backup: np.ndarray, mm: ModelMatrices) -> np.ndarray:
    # DR + gamma DP H(Q) - DQ
    return mm.DR + mm.discount * (mm.DP @ backup) - mm.d * values


def realized_noise(
    q: QTable,
    t: Transition,
    op: SoftOperatorKind,
    mm: ModelMatrices,
    sampling_d: Optional[np.ndarray] = None,
) -> NoiseVector:
    """w_k: direccion muestreada menos su esperanza bajo el modelo."""
    if sampling_d is not None and not np.array_equal(np.asarray(sampling_d), mm.d):
        raise DistributionMismatch("mm se construyo con una d distinta a la del muestreador")
    return NoiseVector(noise_vector(q.values, q.n_states, t, op, mm))


def noise_vector(
    values: np.ndarray, n_states: int, t: Transition, op: SoftOperatorKind, mm: ModelMatrices
) -> np.ndarray:
    backup = soft_values(values.reshape(mm.n_actions, n_states).T, op)
    w = -_mean_direction(values, backup, mm)
    index = t.a * n_states + t.s
    w[index] += t.r + mm.discount * backup[t.s_next] - values[index]
    return w


def _sample_increments(q: QTable, op: SoftOperatorKind, mdp: TabularMdp) -> np.ndarray:
    """g[i, s'] = r(s, a, s') + gamma H(Q)(s') - Q(s, a) para cada par i."""
    backup = soft_backup(q, op)
    reward = mdp.reward.transpose(1, 0, 2).reshape(mdp.n_pairs, mdp.n_states)
    return reward + mdp.discount * backup[None, :] - q.values[:, None]


def expected_noise(q: QTable, op: SoftOperatorKind, mdp: TabularMdp, mm: ModelMatrices) -> np.ndarray:
    """E[w] por enumeracion exhaustiva de (s, a, s') con probabilidad d(s,a) P(s'|s,a)."""
    g = _sample_increments(q, op, mdp)
    mean = _mean_direction(q.values, soft_backup(q, op), mm)
    sampled = mm.d * np.sum(mm.P * g, axis=1)
    return sampled - mean


def noise_covariance(q: QTable, op: SoftOperatorKind, mdp: TabularMdp, mm: ModelMatrices) -> np.ndarray:
    """W = E[w w^T] exacta por enumeracion."""
    g = _sample_increments(q, op, mdp)
    mean = _mean_direction(q.values, soft_backup(q, op), mm)
    first = mm.d * np.sum(mm.P * g, axis=1)
    second = mm.d * np.sum(mm.P * g**2, axis=1)
    return np.diag(second) - np.outer(first, mean) - np.outer(mean, first) + np.outer(mean, mean)


@dataclass(frozen=True, slots=True, eq=False)
class NoiseMoments:
    """Estimaciones de Monte Carlo de E[w] y E[w^T w] con sus errores estandar."""

    mean: np.ndarray
    mean_stderr: np.ndarray
    second_moment: float
    second_moment_stderr: float
    n_samples: int


def noise_moments(
    q: QTable,
    op: SoftOperatorKind,
    mdp: TabularMdp,
    mm: ModelMatrices,
    n_samples: int,
    rng: np.random.Generator,
) -> NoiseMoments:
    """Monte Carlo vectorizado del ruido en q fijo bajo muestreo i.i.d. con mm.d."""
    g_table = _sample_increments(q, op, mdp)
    mean = _mean_direction(q.values, soft_backup(q, op), mm)
    pairs = rng.choice(mm.n_pairs, size=n_samples, p=mm.d)
    cdf = np.cumsum(mm.P, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(n_samples)
    next_states = np.minimum((cdf[pairs] <= u[:, None]).sum(axis=1), mdp.n_states - 1)
    g = g_table[pairs, next_states]
    norms = g**2 - 2.0 * g * mean[pairs] + float(mean @ mean)
    first = np.bincount(pairs, weights=g, minlength=mm.n_pairs) / n_samples
    second = np.bincount(pairs, weights=g**2, minlength=mm.n_pairs) / n_samples
    variance = np.clip(second - first**2, 0.0, None)
    return NoiseMoments(
        mean=first - mean,
        mean_stderr=np.sqrt(variance / n_samples),
        second_moment=float(norms.mean()),
        second_moment_stderr=float(norms.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0,
        n_samples=n_samples,
    )


def _snapshot_due(k: int, cfg: LearnerConfig) -> bool:
    return k <= cfg.dense_snapshot_steps or k % cfg.snapshot_stride == 0 or k == cfg.n_steps


def run(
    cfg: LearnerConfig,
    mdp: TabularMdp,
    rng: Optional[np.random.Generator] = None,
) -> LearnerTrace:
    """Ejecuta cfg.n_steps iteraciones; determinista dada la semilla."""
    cfg.validate(mdp)
    rng = rng if rng is not None else make_stream(cfg.seed)
    sampler: TransitionSampler = build_sampler(cfg.sampling, mdp, rng)
    mm = assemble_matrices(mdp, sampler.distribution) if cfg.record_noise else None
    gamma = mdp.discount
    n_states = mdp.n_states
    values = cfg.initial_q(mdp).values.copy()

    n = cfg.n_steps
    tail = max(1, math.ceil(TAIL_FRACTION * n)) if n else 1
    tail_sum = np.zeros_like(values)
    states = np.empty(n, dtype=np.int64)
    actions = np.empty(n, dtype=np.int64)
    next_states = np.empty(n, dtype=np.int64)
    rewards = np.empty(n)
    noise = np.empty((n, mdp.n_pairs)) if cfg.record_noise else None
    snapshot_steps = [0]
    snapshots = [values.copy()]

    logger.info(
        "Corrida %s alpha=%g pasos=%s semilla=%s", cfg.op.label(), cfg.alpha, n, cfg.seed
    )
    for k in range(n):
        t = sampler.sample(values)
        states[k], actions[k], next_states[k], rewards[k] = t.s, t.a, t.s_next, t.r
        if noise is not None:
            noise[k] = noise_vector(values, n_states, t, cfg.op, mm)
        td_update(values, n_states, t, cfg.op, cfg.alpha, gamma)
        if k + 1 > n - tail:
            tail_sum += values
        if _snapshot_due(k + 1, cfg):
            snapshot_steps.append(k + 1)
            snapshots.append(values.copy())

    tail_mean = tail_sum / tail if n else values.copy()
    violations = sampler.assumption_violations
    if violations:
        logger.warning("Corrida etiquetada con violaciones de supuestos: %s", ", ".join(violations))
    return LearnerTrace(
        op=cfg.op,
        alpha=cfg.alpha,
        seed=cfg.seed,
        snapshot_steps=np.array(snapshot_steps, dtype=np.int64),
        snapshots=np.array(snapshots),
        states=states,
        actions=actions,
        next_states=next_states,
        rewards=rewards,
        final_q=QTable(values, mdp.n_states, mdp.n_actions),
        tail_mean_q=tail_mean,
        noise=noise,
        assumption_violations=violations,
    )


__all__ = [
    "LearnerConfig",
    "NoiseMoments",
    "expected_noise",
    "noise_covariance",
    "noise_moments",
    "noise_vector",
    "realized_noise",
    "run",
    "step",
    "td_update",
]
