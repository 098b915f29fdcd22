"""Operadores LSE, Boltzmann y max con estabilizacion por resta del maximo."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import EmptyActionSet, NonFiniteInput
from .mdp import StochasticPolicy
from .qtable import QTable


class OperatorName(str, Enum):
    LSE = "lse"
    BOLTZMANN = "boltzmann"
    HARDMAX = "max"


@dataclass(frozen=True, slots=True)
class SoftOperatorKind:
    """Operador h(.) de la actualizacion; beta es la temperatura inversa."""

    kind: OperatorName
    beta: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OperatorName(self.kind))
        if self.kind is not OperatorName.HARDMAX and not self.beta > 0:
            raise ValueError(f"beta debe ser positivo para {self.kind.value}, llego {self.beta}")

    @classmethod
    def lse(cls, beta: float) -> "SoftOperatorKind":
        return cls(OperatorName.LSE, beta)

    @classmethod
    def boltzmann(cls, beta: float) -> "SoftOperatorKind":
        return cls(OperatorName.BOLTZMANN, beta)

    @classmethod
    def hardmax(cls) -> "SoftOperatorKind":
        return cls(OperatorName.HARDMAX, math.inf)

    def label(self) -> str:
        if self.kind is OperatorName.HARDMAX:
            return "max"
        return f"{self.kind.value}(beta={self.beta:g})"

    def bias(self, n_actions: int) -> float:
        """ln|A| / beta, la holgura maxima respecto del max."""
        if self.kind is OperatorName.HARDMAX:
            return 0.0
        return math.log(n_actions) / self.beta


def _as_checked_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0 or (v.ndim >= 1 and v.shape[-1] == 0):
        raise EmptyActionSet("El conjunto de acciones esta vacio")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("El vector contiene valores no finitos")
    return v


def soft_values(matrix: np.ndarray, op: SoftOperatorKind) -> np.ndarray:
    """Aplica h a lo largo del ultimo eje (acciones)."""
    matrix = _as_checked_vector(matrix)
    peak = np.max(matrix, axis=-1)
    if op.kind is OperatorName.HARDMAX:
        return peak
    shifted = matrix - peak[..., None]
    if op.kind is OperatorName.LSE:
        # logsumexp(.) >= 0 porque el termino del maximo vale exp(0)
        return peak + logsumexp(op.beta * shifted, axis=-1) / op.beta
    weights = softmax(op.beta * shifted, axis=-1)
    return peak + np.sum(weights * shifted, axis=-1)


def soft_value(v: np.ndarray, op: SoftOperatorKind) -> float:
    v = _as_checked_vector(v).reshape(-1)
    return float(soft_values(v, op))


def soft_backup(q: QTable, op: SoftOperatorKind) -> np.ndarray:
    """H(Q): h aplicado a Q(s, .) para cada estado."""
    return soft_values(q.matrix(), op)


def operator_envelope(v: np.ndarray, op: SoftOperatorKind) -> Tuple[float, float]:
    v = _as_checked_vector(v).reshape(-1)
    peak = float(v.max())
    bias = op.bias(v.size)
    if op.kind is OperatorName.LSE:
        return peak, peak + bias
    if op.kind is OperatorName.BOLTZMANN:
        return peak - bias, peak
    return peak, peak


def softmax_policy(q: QTable, temperature: float = 1.0) -> StochasticPolicy:
    """pi(a|s) proporcional a exp(Q(s, a) / temperature)."""
    return StochasticPolicy(softmax(q.matrix() / temperature, axis=1))


__all__ = [
    "OperatorName",
    "SoftOperatorKind",
    "operator_envelope",
    "soft_backup",
    "soft_value",
    "soft_values",
    "softmax_policy",
]
