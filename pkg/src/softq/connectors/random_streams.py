"""Flujos aleatorios Philox (basados en contador) con claves documentadas.

Cada corrida usa su propio flujo derivado de la clave
``(base_seed, point_index, seed_index)``; las claves de texto se convierten
a enteros con CRC32 para que el mapeo sea estable entre plataformas.
"""
from __future__ import annotations

import zlib
from typing import Union

import numpy as np

KeyPart = Union[int, str]


def _entropy(part: KeyPart) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"Las claves de flujo deben ser no negativas, llego {part}")
    return int(part)


def stream_key(base_seed: int, *parts: KeyPart) -> list[int]:
    return [_entropy(base_seed), *(_entropy(part) for part in parts)]


def make_stream(base_seed: int, *parts: KeyPart) -> np.random.Generator:
    """Generador independiente para la clave dada; misma clave, misma secuencia."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(stream_key(base_seed, *parts))))


def run_stream(
    base_seed: int, seed_index: int, point_index: int = 0, common_random_numbers: bool = True
) -> np.random.Generator:
    """Flujo de una corrida de barrido.

    Con numeros aleatorios comunes el indice del punto no entra en la clave y
    todos los puntos del barrido reutilizan el flujo de cada semilla.
    """
    if common_random_numbers:
        return make_stream(base_seed, "run", seed_index)
    return make_stream(base_seed, "run", point_index, seed_index)


__all__ = ["make_stream", "run_stream", "stream_key"]
