"""Cotas de error en tiempo finito y constantes asociadas.

Los terminos transitorios rho^k y k rho^(k-1) se evaluan en espacio
logaritmico para que no se anulen por underflow cuando rho ~ 1 y k es grande.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from ..errors import DimensionMismatch
from ..models.matrices import ModelMatrices
from ..models.operators import OperatorName
from ..models.qtable import QTable

logger = logging.getLogger(__name__)

Steps = Union[int, float, np.ndarray]
SQRT6 = math.sqrt(6.0)


class BoundKind(str, Enum):
    LSE_LOWER = "lse-lower"
    LSE_FINAL = "lse-final"
    BOLTZ_LOWER = "boltz-lower"
    BOLTZ_FINAL = "boltz-final"
    TRACE_XK = "trace"


class BoundMode(str, Enum):
    MEASURED_GAP = "measured-gap"
    WORST_CASE = "worst-case"


@dataclass(frozen=True, slots=True)
class BoundParams:
    """Simbolos de los teoremas: alpha, beta, gamma, d_min, d_max, |S x A|, |A| y brechas iniciales."""

    alpha: float
    beta: float
    gamma: float
    d_min: float
    d_max: float
    n_pairs: int
    n_actions: int
    q0_gap_l2: float = 0.0
    q0_gap_linf: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha} fuera de (0, 1)")
        if not self.beta > 0.0:
            raise ValueError(f"beta={self.beta} debe ser positivo")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma={self.gamma} fuera de [0, 1)")
        if not 0.0 < self.d_min <= self.d_max < 1.0:
            raise ValueError(f"Se requiere 0 < d_min <= d_max < 1 (d_min={self.d_min}, d_max={self.d_max})")
        if self.n_pairs < 1 or self.n_actions < 1:
            raise ValueError("n_pairs y n_actions deben ser positivos")
        if self.q0_gap_l2 < 0 or self.q0_gap_linf < 0:
            raise ValueError("Las brechas iniciales deben ser no negativas")

    @property
    def log_actions(self) -> float:
        return math.log(self.n_actions)

    @classmethod
    def from_model(
        cls,
        mm: ModelMatrices,
        alpha: float,
        beta: float,
        q0: QTable | None = None,
        q_star: QTable | None = None,
        mode: BoundMode | str = BoundMode.MEASURED_GAP,
    ) -> "BoundParams":
        """Llena d_min/d_max desde mm y las brechas desde q0 y Q* (o la version holgada)."""
        base = dict(
            alpha=alpha,
            beta=beta,
            gamma=mm.discount,
            d_min=mm.d_min,
            d_max=mm.d_max,
            n_pairs=mm.n_pairs,
            n_actions=mm.n_actions,
        )
        if BoundMode(mode) is BoundMode.WORST_CASE:
            return cls.worst_case(**base)
        if q0 is None or q_star is None:
            raise ValueError("El modo measured-gap requiere q0 y q_star")
        gap = q0 - q_star
        return cls(**base, q0_gap_l2=float(np.linalg.norm(gap)), q0_gap_linf=float(np.max(np.abs(gap))))

    @classmethod
    def worst_case(cls, **kwargs: float) -> "BoundParams":
        """Brechas ||Q0 - Q*||_2 <= |S x A|^(1/2) 2/(1 - gamma) y ||.||_inf <= 2/(1 - gamma)."""
        gamma = kwargs["gamma"]
        n_pairs = kwargs["n_pairs"]
        return cls(
            **kwargs,
            q0_gap_l2=math.sqrt(n_pairs) * 2.0 / (1.0 - gamma),
            q0_gap_linf=2.0 / (1.0 - gamma),
        )


@dataclass(frozen=True, slots=True, eq=False)
class BoundCurve:
    kind: BoundKind
    steps: np.ndarray
    values: np.ndarray

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.steps, self.values)]


def decay_rate(p: BoundParams) -> float:
    """rho = 1 - alpha d_min (1 - gamma)."""
    return 1.0 - p.alpha * p.d_min * (1.0 - p.gamma)


def _as_steps(k: Steps) -> np.ndarray:
    return np.asarray(k, dtype=np.float64)


def _unwrap(values: np.ndarray) -> Union[float, np.ndarray]:
    return float(values) if values.ndim == 0 else values


def geometric_term(k: Steps, p: BoundParams, power: float = 1.0) -> Union[float, np.ndarray]:
    """rho^(power k) via exp(power k ln rho)."""
    steps = _as_steps(k)
    return _unwrap(np.exp(power * steps * math.log(decay_rate(p))))


def linear_geometric_term(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    """k rho^(k - 1); vale 0 en k = 0."""
    steps = _as_steps(k)
    log_rho = math.log(decay_rate(p))
    with np.errstate(divide="ignore"):
        values = np.where(steps > 0, np.exp(np.log(np.maximum(steps, 1.0)) + (steps - 1.0) * log_rho), 0.0)
    return _unwrap(values)


def _sharpness(p: BoundParams) -> float:
    # (ln|A| + beta) / beta
    return (p.log_actions + p.beta) / p.beta


def lse_lower_constant(p: BoundParams) -> float:
    return SQRT6 * math.sqrt(p.alpha) * _sharpness(p) * p.n_pairs / (
        math.sqrt(p.d_min) * (1.0 - p.gamma) ** 1.5
    )


def lse_lower_bound(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    return lse_lower_constant(p) + p.n_pairs * p.q0_gap_l2 * geometric_term(k, p)


def lse_final_constant(p: BoundParams) -> float:
    first = 3.0 * SQRT6 * math.sqrt(p.alpha) * p.d_max * _sharpness(p) * p.n_pairs / (
        p.d_min**1.5 * (1.0 - p.gamma) ** 2.5
    )
    bias = p.log_actions / (p.beta * p.d_min * (1.0 - p.gamma))
    return first + bias


def lse_final_bound(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    scale = p.n_pairs**1.5 / (1.0 - p.gamma)
    transient = 4.0 * p.alpha * p.gamma * p.d_max * scale * linear_geometric_term(k, p)
    return lse_final_constant(p) + transient + 2.0 * scale * geometric_term(k, p)


def boltz_lower_constant(p: BoundParams) -> float:
    root = math.sqrt(p.n_pairs)
    noise = SQRT6 * math.sqrt(p.alpha) * _sharpness(p) * root / (
        math.sqrt(p.d_min) * (1.0 - p.gamma) ** 1.5
    )
    bias = p.gamma * p.d_max * p.log_actions * root / (p.beta * p.d_min * (1.0 - p.gamma))
    return noise + bias


def boltz_lower_bound(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    return math.sqrt(p.n_pairs) * p.q0_gap_l2 * geometric_term(k, p) + boltz_lower_constant(p)


def boltz_final_constant(p: BoundParams) -> float:
    root = math.sqrt(p.n_pairs)
    noise = 3.0 * SQRT6 * math.sqrt(p.alpha) * p.d_max * _sharpness(p) * root / (
        p.d_min**1.5 * (1.0 - p.gamma) ** 2.5
    )
    bias = 4.0 * p.d_max * p.log_actions * root / (p.beta * p.d_min**2 * (1.0 - p.gamma) ** 2)
    return noise + bias


def boltz_final_bound(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    scale = p.n_pairs / (1.0 - p.gamma)
    transient = 4.0 * p.alpha * p.gamma * p.d_max * scale * linear_geometric_term(k, p)
    return transient + boltz_final_constant(p) + 2.0 * scale * geometric_term(k, p)


def trace_constant(p: BoundParams) -> float:
    return 6.0 * p.alpha * _sharpness(p) ** 2 * p.n_pairs**2 / (p.d_min * (1.0 - p.gamma) ** 3)


def trace_bound(k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    """Cota de tr(X_k) para la autocorrelacion del sistema inferior."""
    return trace_constant(p) + p.n_pairs**2 * p.q0_gap_l2**2 * geometric_term(k, p, power=2.0)


def noise_moment_bound(p: BoundParams) -> float:
    """E[w^T w] <= 6 (ln|A| + beta)^2 / (beta^2 (1 - gamma)^2)."""
    return 6.0 * _sharpness(p) ** 2 / (1.0 - p.gamma) ** 2


def iterate_bound(p: BoundParams) -> float:
    """||Q_k||_inf <= (1 + gamma ln|A| / beta) / (1 - gamma)."""
    return (1.0 + p.gamma * p.log_actions / p.beta) / (1.0 - p.gamma)


BOUND_FUNCTIONS = {
    BoundKind.LSE_LOWER: lse_lower_bound,
    BoundKind.LSE_FINAL: lse_final_bound,
    BoundKind.BOLTZ_LOWER: boltz_lower_bound,
    BoundKind.BOLTZ_FINAL: boltz_final_bound,
    BoundKind.TRACE_XK: trace_bound,
}

CONSTANT_TERMS = {
    BoundKind.LSE_LOWER: lse_lower_constant,
    BoundKind.LSE_FINAL: lse_final_constant,
    BoundKind.BOLTZ_LOWER: boltz_lower_constant,
    BoundKind.BOLTZ_FINAL: boltz_final_constant,
    BoundKind.TRACE_XK: trace_constant,
}


def evaluate(kind: BoundKind | str, k: Steps, p: BoundParams) -> Union[float, np.ndarray]:
    return BOUND_FUNCTIONS[BoundKind(kind)](k, p)


def final_bound_kind(op_kind: OperatorName) -> BoundKind:
    if op_kind is OperatorName.LSE:
        return BoundKind.LSE_FINAL
    if op_kind is OperatorName.BOLTZMANN:
        return BoundKind.BOLTZ_FINAL
    raise ValueError(f"No hay cota final para el operador {op_kind.value}")


def bound_curve(kind: BoundKind | str, steps: Iterable[int], p: BoundParams) -> BoundCurve:
    kind = BoundKind(kind)
    ks = np.asarray(list(steps), dtype=np.int64)
    values = np.atleast_1d(np.asarray(evaluate(kind, ks, p), dtype=np.float64))
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        logger.warning("Curva %s con valores no finitos o negativos", kind.value)
    return BoundCurve(kind=kind, steps=ks, values=values)


def transient_horizon(p: BoundParams, multiple: float = 40.0) -> int:
    """k = ceil(multiple / (1 - rho)), donde los transitorios ya son despreciables."""
    # multiple = 40 y no 20: en k = 20 / (1 - rho) el termino k rho^k todavia vale ~1e-3 con rho = 0.999975
    return math.ceil(multiple / (1.0 - decay_rate(p)))


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def autocorrelation_path(
    x0: np.ndarray, a: np.ndarray, w_seq: Sequence[np.ndarray], alpha: float, k: int
) -> list[np.ndarray]:
    """X_0, ..., X_k con X_{j+1} = A X_j A^T + alpha^2 W_j."""
    x = np.asarray(x0, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    n = x.shape[0]
    if x.shape != (n, n) or a.shape != (n, n):
        raise DimensionMismatch("x0 y a deben ser cuadradas y de la misma dimension")
    if len(w_seq) < k:
        raise DimensionMismatch(f"Se requieren {k} matrices W y llegaron {len(w_seq)}")
    path = [_symmetrize(x)]
    for j in range(k):
        w = np.asarray(w_seq[j], dtype=np.float64)
        if w.shape != (n, n):
            raise DimensionMismatch(f"W_{j} tiene forma {w.shape}, se esperaba {(n, n)}")
        x = _symmetrize(a @ x @ a.T + alpha**2 * w)
        path.append(x)
    return path


def propagate_autocorrelation(
    x0: np.ndarray, a: np.ndarray, w_seq: Sequence[np.ndarray], alpha: float, k: int
) -> np.ndarray:
    return autocorrelation_path(x0, a, w_seq, alpha, k)[-1]


__all__ = [
    "BoundCurve",
    "BoundKind",
    "BoundMode",
    "BoundParams",
    "autocorrelation_path",
    "bound_curve",
    "boltz_final_bound",
    "boltz_lower_bound",
    "decay_rate",
    "evaluate",
    "final_bound_kind",
    "geometric_term",
    "iterate_bound",
    "linear_geometric_term",
    "lse_final_bound",
    "lse_lower_bound",
    "noise_moment_bound",
    "propagate_autocorrelation",
    "trace_bound",
    "transient_horizon",
]
