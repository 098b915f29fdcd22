"""Registros de ejecucion del aprendiz y de los sistemas de comparacion."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .operators import SoftOperatorKind
from .qtable import QTable

SANDWICH_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class Transition:
    """Una observacion (s, a, s', r) del paso k."""

    s: int
    a: int
    s_next: int
    r: float
    step: int


@dataclass(frozen=True, slots=True, eq=False)
class NoiseVector:
    """Ruido realizado w_k de longitud |S||A|."""

    w: np.ndarray

    def second_moment(self) -> float:
        return float(self.w @ self.w)


@dataclass(slots=True, eq=False)
class LearnerTrace:
    """Iterados muestreados, transiciones y (opcionalmente) ruido de una corrida."""

    op: SoftOperatorKind
    alpha: float
    seed: int
    snapshot_steps: np.ndarray
    snapshots: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    rewards: np.ndarray
    final_q: QTable
    tail_mean_q: np.ndarray
    noise: Optional[np.ndarray] = None
    assumption_violations: Tuple[str, ...] = ()

    @property
    def n_steps(self) -> int:
        return int(self.states.size)

    def transition(self, k: int) -> Transition:
        return Transition(
            s=int(self.states[k]),
            a=int(self.actions[k]),
            s_next=int(self.next_states[k]),
            r=float(self.rewards[k]),
            step=k,
        )


@dataclass(slots=True, eq=False)
class CoupledTrace:
    """Co-simulacion paso a paso: aprendiz, cotas inferior/superior y sistema de error.

    Las trayectorias se guardan como desviaciones respecto de Q*.
    """

    op: SoftOperatorKind
    alpha: float
    seed: int
    q_star: QTable
    x_learner: np.ndarray
    x_lower: np.ndarray
    x_upper: np.ndarray
    error_system: np.ndarray
    noise: np.ndarray
    lower_ok: np.ndarray
    upper_ok: np.ndarray
    slack: float = SANDWICH_SLACK
    violations: list[int] = field(default_factory=list)

    @property
    def beta(self) -> float:
        return self.op.beta

    @property
    def n_steps(self) -> int:
        return int(self.noise.shape[0])

    def lower_min_slack(self) -> np.ndarray:
        return np.min(self.x_learner - self.x_lower, axis=1)

    def upper_min_slack(self) -> np.ndarray:
        return np.min(self.x_upper - self.x_learner, axis=1)

    def sandwich_holds(self) -> bool:
        return bool(np.all(self.lower_ok) and np.all(self.upper_ok))

    def q_learner(self, k: int) -> QTable:
        return QTable(self.q_star.values + self.x_learner[k], self.q_star.n_states, self.q_star.n_actions)


@dataclass(slots=True)
class SeedOutcome:
    """Resultado de una semilla en un punto del barrido."""

    point_index: int
    sweep_value: float
    seed_index: int
    final_error: float
    tail_error: float
    n_steps: int
    assumption_violations: Tuple[str, ...] = ()
    sandwich_holds: Optional[bool] = None
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


@dataclass(frozen=True, slots=True)
class SweepPoint:
    sweep_value: float
    mean_error: float
    stderr: float
    bound: float
    n_seeds: int
    n_steps: int
    mean_tail_error: float
    d_min: float
    d_max: float


@dataclass(slots=True)
class SweepResult:
    """Errores promediados por semilla y cota teorica en k = n_steps, por valor del barrido."""

    label: str
    operator: str
    axis: str
    points: list[SweepPoint]
    seeds: list[SeedOutcome] = field(default_factory=list)
    protocol: str = "iid"
    bound_mode: str = "measured-gap"

    def __post_init__(self) -> None:
        self.points = sorted(self.points, key=lambda point: point.sweep_value)

    @property
    def sweep_values(self) -> np.ndarray:
        return np.array([p.sweep_value for p in self.points])

    @property
    def mean_errors(self) -> np.ndarray:
        return np.array([p.mean_error for p in self.points])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])

    @property
    def bounds(self) -> np.ndarray:
        return np.array([p.bound for p in self.points])

    def failures(self) -> list[SeedOutcome]:
        return [outcome for outcome in self.seeds if not outcome.ok]


__all__ = [
    "CoupledTrace",
    "LearnerTrace",
    "NoiseVector",
    "SANDWICH_SLACK",
    "SeedOutcome",
    "SweepPoint",
    "SweepResult",
    "Transition",
]
