"""Tabla Q plana en orden por accion: indice = a * n_estados + s."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, IndexOutOfRange


def flat_index(s: int, a: int, n_states: int, n_actions: int | None = None) -> int:
    """Indice plano del par (s, a): a * n_states + s (base 0)."""
    if not 0 <= s < n_states:
        raise IndexOutOfRange(f"Estado {s} fuera de rango [0, {n_states})")
    if a < 0 or (n_actions is not None and a >= n_actions):
        raise IndexOutOfRange(f"Accion {a} fuera de rango")
    return a * n_states + s


@dataclass(frozen=True, slots=True, eq=False)
class QTable:
    """Vector Q(., 1), ..., Q(., |A|) apilado por accion.

    El arreglo interno es de solo lectura; las actualizaciones devuelven
    una tabla nueva.
    """

    values: np.ndarray
    n_states: int
    n_actions: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size != self.n_states * self.n_actions:
            raise DimensionMismatch(
                f"Se esperaban {self.n_states * self.n_actions} valores y llegaron {values.size}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "QTable":
        return cls(np.zeros(n_states * n_actions), n_states, n_actions)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "QTable":
        """Construye la tabla desde una matriz indexada [s, a]."""
        matrix = np.asarray(matrix, dtype=np.float64)
        n_states, n_actions = matrix.shape
        return cls(matrix.T.reshape(-1), n_states, n_actions)

    @property
    def n_pairs(self) -> int:
        return self.n_states * self.n_actions

    def get(self, s: int, a: int) -> float:
        return float(self.values[flat_index(s, a, self.n_states, self.n_actions)])

    def row(self, s: int) -> np.ndarray:
        """Q(s, .) como vector sobre acciones."""
        return self.values[s :: self.n_states]

    def matrix(self) -> np.ndarray:
        """Vista [s, a] de la tabla."""
        return self.values.reshape(self.n_actions, self.n_states).T

    def with_entry(self, s: int, a: int, value: float) -> "QTable":
        values = self.values.copy()
        values[flat_index(s, a, self.n_states, self.n_actions)] = value
        return QTable(values, self.n_states, self.n_actions)

    def linf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __sub__(self, other: "QTable") -> np.ndarray:
        return self.values - other.values


__all__ = ["QTable", "flat_index"]
