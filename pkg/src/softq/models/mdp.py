"""MDP tabular y politicas estocasticas."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from ..errors import (
    ConfigParseError,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidDiscount,
    InvalidMdpError,
    InvalidPolicy,
    NegativeProbability,
    NonStochasticRow,
    RewardOutOfBounds,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
POLICY_TOLERANCE = 1e-12

RewardEntry = Tuple[int, int, int, float]


class MdpSpec(BaseModel):
    """Descripcion cruda de un MDP tal como aparece en los archivos (indices base 1)."""

    n_states: int = Field(gt=0)
    n_actions: int = Field(gt=0)
    transitions: List[List[List[float]]]
    rewards: List[RewardEntry] = Field(default_factory=list)
    discount: float
    initial_distribution: Optional[List[float]] = None


@dataclass(frozen=True, slots=True, eq=False)
class TabularMdp:
    """MDP completo: P_a por accion, tensor r(s, a, s') y descuento."""

    n_states: int
    n_actions: int
    transition: np.ndarray
    reward: np.ndarray
    discount: float
    initial_distribution: np.ndarray
    strict: bool = True

    @property
    def n_pairs(self) -> int:
        return self.n_states * self.n_actions

    @property
    def max_abs_reward(self) -> float:
        return float(np.max(np.abs(self.reward))) if self.reward.size else 0.0

    def next_state_probs(self, s: int, a: int) -> np.ndarray:
        return self.transition[a, s]


@dataclass(frozen=True, slots=True, eq=False)
class StochasticPolicy:
    """Matriz n_states x n_actions con una distribucion por estado."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise DimensionMismatch("La politica debe ser una matriz estados x acciones")
        if np.any(probs < 0):
            raise InvalidPolicy("La politica contiene probabilidades negativas")
        deviation = np.max(np.abs(probs.sum(axis=1) - 1.0))
        if deviation > POLICY_TOLERANCE:
            raise InvalidPolicy(f"Las filas de la politica no suman 1 (desvio {deviation:.3e})")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> "StochasticPolicy":
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def deterministic(cls, actions: Any, n_actions: int) -> "StochasticPolicy":
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros((actions.size, n_actions))
        probs[np.arange(actions.size), actions] = 1.0
        return cls(probs)


def _check_distribution(values: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NonStochasticRow(f"{name} contiene valores no finitos")
    if np.any(values < 0):
        raise NegativeProbability(f"{name} contiene probabilidades negativas")
    if abs(values.sum() - 1.0) > ROW_SUM_TOLERANCE:
        raise NonStochasticRow(f"{name} no suma 1 (suma {values.sum():.12g})")


def validate_arrays(
    transition: np.ndarray,
    reward: np.ndarray,
    discount: float,
    initial_distribution: np.ndarray | None = None,
    strict: bool = True,
) -> TabularMdp:
    """Valida arreglos ya indexados en base 0 y construye el MDP."""
    transition = np.array(transition, dtype=np.float64)
    reward = np.array(reward, dtype=np.float64)
    if transition.ndim != 3 or transition.shape[1] != transition.shape[2]:
        raise DimensionMismatch("transition debe tener forma (n_actions, n_states, n_states)")
    n_actions, n_states, _ = transition.shape
    if reward.shape != (n_states, n_actions, n_states):
        raise DimensionMismatch(
            f"reward debe tener forma {(n_states, n_actions, n_states)}, llego {reward.shape}"
        )
    if not np.all(np.isfinite(transition)):
        a, s, s_next = np.argwhere(~np.isfinite(transition))[0]
        raise NonStochasticRow(f"P[a={a}][{s}, {s_next}] no es finita")
    if np.any(transition < 0):
        a, s, s_next = np.argwhere(transition < 0)[0]
        raise NegativeProbability(f"P[a={a}][{s}, {s_next}] es negativa")
    row_sums = transition.sum(axis=2)
    bad = np.argwhere(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE)
    if bad.size:
        a, s = bad[0]
        raise NonStochasticRow(f"La fila {s} de P[a={a}] suma {row_sums[a, s]:.12g}")
    if not np.all(np.isfinite(reward)):
        raise InvalidMdpError("Las recompensas deben ser finitas")
    if strict and np.max(np.abs(reward), initial=0.0) > 1.0:
        raise RewardOutOfBounds("max |r(s,a,s')| > 1 en modo estricto")
    if not 0.0 <= discount < 1.0:
        raise InvalidDiscount(f"gamma={discount} fuera de [0, 1)")
    if initial_distribution is None:
        initial = np.full(n_states, 1.0 / n_states)
    else:
        initial = np.array(initial_distribution, dtype=np.float64)
        if initial.shape != (n_states,):
            raise DimensionMismatch("initial_distribution debe tener n_states entradas")
        _check_distribution(initial, "initial_distribution")
    for array in (transition, reward, initial):
        array.setflags(write=False)
    return TabularMdp(
        n_states=n_states,
        n_actions=n_actions,
        transition=transition,
        reward=reward,
        discount=float(discount),
        initial_distribution=initial,
        strict=strict,
    )


def build_mdp(spec: MdpSpec | Mapping[str, Any], strict: bool = True) -> TabularMdp:
    """Valida una descripcion cruda (indices base 1) y devuelve el MDP."""
    if not isinstance(spec, MdpSpec):
        spec = MdpSpec.model_validate(spec)
    transition = np.array(spec.transitions, dtype=np.float64)
    if transition.shape != (spec.n_actions, spec.n_states, spec.n_states):
        raise DimensionMismatch(
            f"transitions debe tener forma {(spec.n_actions, spec.n_states, spec.n_states)}"
        )
    reward = np.zeros((spec.n_states, spec.n_actions, spec.n_states))
    for s, a, s_next, value in spec.rewards:
        if not (1 <= s <= spec.n_states and 1 <= s_next <= spec.n_states):
            raise IndexOutOfRange(f"Recompensa con estado fuera de rango: {(s, a, s_next)}")
        if not 1 <= a <= spec.n_actions:
            raise IndexOutOfRange(f"Recompensa con accion fuera de rango: {(s, a, s_next)}")
        reward[s - 1, a - 1, s_next - 1] = value
    mdp = validate_arrays(
        transition, reward, spec.discount, spec.initial_distribution, strict=strict
    )
    logger.debug("MDP construido: %s estados, %s acciones", mdp.n_states, mdp.n_actions)
    return mdp


def two_state_spec() -> MdpSpec:
    """MDP de dos estados y dos acciones usado como caso de referencia."""
    return MdpSpec(
        n_states=2,
        n_actions=2,
        transitions=[[[0.5, 0.5], [0.9, 0.1]], [[0.6, 0.4], [0.3, 0.7]]],
        rewards=[
            (1, 1, 1, 0.5),
            (1, 1, 2, 1.0),
            (1, 2, 2, -0.5),
            (2, 1, 2, -0.5),
            (2, 2, 1, -0.5),
        ],
        discount=0.9,
        initial_distribution=[0.8, 0.2],
    )


def two_state_mdp(strict: bool = True) -> TabularMdp:
    return build_mdp(two_state_spec(), strict=strict)


def mdp_to_spec(mdp: TabularMdp) -> MdpSpec:
    rewards = [
        (int(s) + 1, int(a) + 1, int(s_next) + 1, float(mdp.reward[s, a, s_next]))
        for s, a, s_next in np.argwhere(mdp.reward != 0.0)
    ]
    return MdpSpec(
        n_states=mdp.n_states,
        n_actions=mdp.n_actions,
        transitions=mdp.transition.tolist(),
        rewards=rewards,
        discount=mdp.discount,
        initial_distribution=mdp.initial_distribution.tolist(),
    )


def parse_mdp_text(text: str, strict: bool = True) -> TabularMdp:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"Archivo MDP invalido: {exc.msg}", exc.lineno, exc.colno) from exc
    try:
        spec = MdpSpec.model_validate(payload)
    except PydanticValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise InvalidMdpError(f"Campo {field}: {first['msg']}") from exc
    return build_mdp(spec, strict=strict)


def load_mdp_file(path: str | Path, strict: bool = True) -> TabularMdp:
    path = Path(path)
    logger.info("Leyendo MDP desde %s", path)
    return parse_mdp_text(path.read_text(encoding="utf-8"), strict=strict)


def dump_mdp_file(mdp: TabularMdp, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(mdp_to_spec(mdp).model_dump_json(indent=2), encoding="utf-8")
    return path


__all__ = [
    "MdpSpec",
    "StochasticPolicy",
    "TabularMdp",
    "build_mdp",
    "dump_mdp_file",
    "two_state_mdp",
    "two_state_spec",
    "load_mdp_file",
    "mdp_to_spec",
    "parse_mdp_text",
    "validate_arrays",
]
