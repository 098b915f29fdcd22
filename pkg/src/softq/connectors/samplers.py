"""Fuentes de transiciones: muestreo i.i.d. del analisis y trayectorias episodicas."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import softmax

from ..errors import DimensionMismatch, NonStochasticRow
from ..models.mdp import StochasticPolicy, TabularMdp
from ..models.trace import Transition

logger = logging.getLogger(__name__)

TIME_VARYING_POLICY = "time-varying-policy"


@dataclass(frozen=True, slots=True, eq=False)
class IidSampling:
    """(s, a) ~ d i.i.d. y luego s' ~ P(.|s, a)."""

    d: np.ndarray


@dataclass(frozen=True, slots=True, eq=False)
class TrajectorySampling:
    """Episodios desde initial_distribution con corte en max_episode_steps.

    Sin behavior_policy la accion se elige con softmax de Q(s, .).
    """

    initial_distribution: Optional[np.ndarray] = None
    max_episode_steps: int = 50
    behavior_policy: Optional[StochasticPolicy] = None


SamplingMode = Union[IidSampling, TrajectorySampling]


def _cumulative(probs: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs, axis=-1)
    cdf[..., -1] = 1.0
    return cdf


class TransitionSampler(ABC):
    """Interfaz comun de las fuentes de transiciones."""

    def __init__(self, mdp: TabularMdp, rng: np.random.Generator) -> None:
        self._mdp = mdp
        self._rng = rng
        self._next_cdf = _cumulative(mdp.transition)
        self._steps = 0

    @abstractmethod
    def sample(self, q_values: np.ndarray) -> Transition:
        """Devuelve la siguiente transicion; q_values es el iterado actual."""

    @property
    def distribution(self) -> Optional[np.ndarray]:
        """d usada para muestrear, si es fija."""
        return None

    @property
    def assumption_violations(self) -> Tuple[str, ...]:
        return ()

    @property
    def steps(self) -> int:
        return self._steps

    def _observe(self, s: int, a: int) -> Transition:
        s_next = int(np.searchsorted(self._next_cdf[a, s], self._rng.random(), side="right"))
        s_next = min(s_next, self._mdp.n_states - 1)
        transition = Transition(
            s=s, a=a, s_next=s_next, r=float(self._mdp.reward[s, a, s_next]), step=self._steps
        )
        self._steps += 1
        return transition


class IidSampler(TransitionSampler):
    """Muestreo i.i.d. de pares segun d (modelo del analisis)."""

    def __init__(self, mdp: TabularMdp, d: np.ndarray, rng: np.random.Generator) -> None:
        super().__init__(mdp, rng)
        d = np.array(d, dtype=np.float64).reshape(-1)
        if d.size != mdp.n_pairs:
            raise DimensionMismatch(f"d debe tener {mdp.n_pairs} entradas")
        if np.any(d < 0) or abs(d.sum() - 1.0) > 1e-10:
            raise NonStochasticRow("d debe ser una distribucion de probabilidad")
        d.setflags(write=False)
        self._d = d
        self._pair_cdf = _cumulative(d)

    @property
    def distribution(self) -> np.ndarray:
        return self._d

    def sample(self, q_values: np.ndarray) -> Transition:
        pair = int(np.searchsorted(self._pair_cdf, self._rng.random(), side="right"))
        pair = min(pair, self._mdp.n_pairs - 1)
        a, s = divmod(pair, self._mdp.n_states)
        return self._observe(s, a)


class TrajectorySampler(TransitionSampler):
    """Trayectorias episodicas con reinicio desde el estado inicial."""

    def __init__(
        self,
        mdp: TabularMdp,
        rng: np.random.Generator,
        initial_distribution: Optional[np.ndarray] = None,
        max_episode_steps: int = 50,
        behavior_policy: Optional[StochasticPolicy] = None,
    ) -> None:
        super().__init__(mdp, rng)
        if max_episode_steps < 1:
            raise ValueError("max_episode_steps debe ser >= 1")
        initial = mdp.initial_distribution if initial_distribution is None else initial_distribution
        self._initial_cdf = _cumulative(np.asarray(initial, dtype=np.float64))
        self._max_episode_steps = max_episode_steps
        self._behavior = behavior_policy
        self._state = 0
        self._episode_step = 0
        self._episodes = 0

    @property
    def assumption_violations(self) -> Tuple[str, ...]:
        return (TIME_VARYING_POLICY,) if self._behavior is None else ()

    @property
    def episode_step(self) -> int:
        return self._episode_step

    @property
    def episodes(self) -> int:
        return self._episodes

    def _action_probs(self, s: int, q_values: np.ndarray) -> np.ndarray:
        if self._behavior is not None:
            return self._behavior.probs[s]
        return softmax(q_values[s :: self._mdp.n_states])

    def sample(self, q_values: np.ndarray) -> Transition:
        if self._episode_step == 0:
            self._state = int(np.searchsorted(self._initial_cdf, self._rng.random(), side="right"))
            self._state = min(self._state, self._mdp.n_states - 1)
            self._episodes += 1
        s = self._state
        a_cdf = _cumulative(self._action_probs(s, q_values))
        a = min(int(np.searchsorted(a_cdf, self._rng.random(), side="right")), self._mdp.n_actions - 1)
        transition = self._observe(s, a)
        self._episode_step += 1
        if self._episode_step >= self._max_episode_steps:
            self._episode_step = 0
        else:
            self._state = transition.s_next
        return transition


def build_sampler(sampling: SamplingMode, mdp: TabularMdp, rng: np.random.Generator) -> TransitionSampler:
    if isinstance(sampling, IidSampling):
        return IidSampler(mdp, sampling.d, rng)
    if isinstance(sampling, TrajectorySampling):
        if sampling.behavior_policy is None:
            logger.info("Politica de comportamiento softmax(Q): la distribucion d no es estacionaria")
        return TrajectorySampler(
            mdp,
            rng,
            initial_distribution=sampling.initial_distribution,
            max_episode_steps=sampling.max_episode_steps,
            behavior_policy=sampling.behavior_policy,
        )
    raise TypeError(f"Modo de muestreo no soportado: {type(sampling).__name__}")


def sample_transition(sampler: TransitionSampler, q_values: np.ndarray) -> Transition:
    """Avanza la fuente un paso; el estado del muestreador queda en el objeto."""
    return sampler.sample(np.asarray(q_values, dtype=np.float64))


__all__ = [
    "IidSampler",
    "IidSampling",
    "SamplingMode",
    "TIME_VARYING_POLICY",
    "TrajectorySampler",
    "TrajectorySampling",
    "TransitionSampler",
    "build_sampler",
    "sample_transition",
]
