"""Excepciones del laboratorio softq."""
from __future__ import annotations


class SoftQError(RuntimeError):
    """Error base de softq."""


class InvalidMdpError(SoftQError, ValueError):
    """El modelo (MDP, politica o distribucion) no es valido."""


class NonStochasticRow(InvalidMdpError):
    """Alguna fila de una matriz de transicion no suma 1."""


class NegativeProbability(InvalidMdpError):
    """Se encontro una probabilidad negativa."""


class RewardOutOfBounds(InvalidMdpError):
    """La recompensa excede 1 en valor absoluto en modo estricto."""


class InvalidDiscount(InvalidMdpError):
    """El factor de descuento no esta en [0, 1)."""


class IndexOutOfRange(InvalidMdpError, IndexError):
    """Indice de estado o accion fuera de rango."""


class ZeroVisitProbability(InvalidMdpError):
    """Algun par estado-accion tiene probabilidad de visita nula."""


class InvalidPolicy(InvalidMdpError):
    """Las filas de la politica no son vectores de probabilidad."""


class NotConverged(SoftQError):
    """Un metodo iterativo agoto su limite de iteraciones."""


class Reducible(SoftQError):
    """La cadena inducida tiene mas de una clase recurrente."""


class EmptyActionSet(SoftQError, ValueError):
    """El operador recibio un vector vacio."""


class NonFiniteInput(SoftQError, ValueError):
    """El operador recibio valores no finitos."""


class DimensionMismatch(SoftQError, ValueError):
    """Dimensiones incompatibles entre matrices."""


class DistributionMismatch(SoftQError, ValueError):
    """Las matrices del modelo se construyeron con otra distribucion d."""


class AssumptionViolation(SoftQError, ValueError):
    """Parametros fuera del regimen acotado (alpha, recompensas, q0) en modo estricto."""


class SandwichViolation(SoftQError):
    """El orden inferior <= aprendiz <= superior se rompio."""


class ConfigParseError(SoftQError, ValueError):
    """El documento de configuracion no se pudo leer."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        location = f" (linea {line}, columna {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class ConfigValidationError(SoftQError, ValueError):
    """La configuracion viola alguna invariante."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


__all__ = [
    "AssumptionViolation",
    "ConfigParseError",
    "ConfigValidationError",
    "DimensionMismatch",
    "DistributionMismatch",
    "EmptyActionSet",
    "IndexOutOfRange",
    "InvalidDiscount",
    "InvalidMdpError",
    "InvalidPolicy",
    "NegativeProbability",
    "NonFiniteInput",
    "NonStochasticRow",
    "NotConverged",
    "Reducible",
    "RewardOutOfBounds",
    "SandwichViolation",
    "SoftQError",
    "ZeroVisitProbability",
]
