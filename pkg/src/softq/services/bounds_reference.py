"""Re-implementacion directa (escalar, sin espacio logaritmico) de las cotas.

Sirve como segunda implementacion para contrastar bounds_service.
"""
from __future__ import annotations

import math
from typing import Dict, List

import numpy as np

from ..connectors.random_streams import make_stream
from .bounds_service import BoundKind, BoundParams


def rho(alpha: float, d_min: float, gamma: float) -> float:
    return 1.0 - alpha * d_min * (1.0 - gamma)


def lse_lower(k: int, p: BoundParams) -> float:
    r = rho(p.alpha, p.d_min, p.gamma)
    la = math.log(p.n_actions)
    first = math.sqrt(6) * p.alpha**0.5 * (la + p.beta) * p.n_pairs / (
        p.beta * p.d_min**0.5 * (1 - p.gamma) ** 1.5
    )
    return first + p.n_pairs * p.q0_gap_l2 * r**k


def lse_final(k: int, p: BoundParams) -> float:
    r = rho(p.alpha, p.d_min, p.gamma)
    la = math.log(p.n_actions)
    n = p.n_pairs
    t1 = 3 * math.sqrt(6) * p.alpha**0.5 * p.d_max * (la + p.beta) * n / (
        p.beta * p.d_min**1.5 * (1 - p.gamma) ** 2.5
    )
    t2 = 4 * p.alpha * p.gamma * p.d_max * n**1.5 / (1 - p.gamma) * (k * r ** (k - 1) if k > 0 else 0.0)
    t3 = la / (p.beta * p.d_min * (1 - p.gamma))
    t4 = 2 * n**1.5 / (1 - p.gamma) * r**k
    return t1 + t2 + t3 + t4


def boltz_lower(k: int, p: BoundParams) -> float:
    r = rho(p.alpha, p.d_min, p.gamma)
    la = math.log(p.n_actions)
    n = p.n_pairs
    t1 = n**0.5 * p.q0_gap_l2 * r**k
    t2 = math.sqrt(6) * p.alpha**0.5 * (la + p.beta) * n**0.5 / (p.beta * p.d_min**0.5 * (1 - p.gamma) ** 1.5)
    t3 = p.gamma * p.d_max * la * n**0.5 / (p.beta * p.d_min * (1 - p.gamma))
    return t1 + t2 + t3


def boltz_final(k: int, p: BoundParams) -> float:
    r = rho(p.alpha, p.d_min, p.gamma)
    la = math.log(p.n_actions)
    n = p.n_pairs
    t1 = 4 * p.alpha * p.gamma * p.d_max * n / (1 - p.gamma) * (k * r ** (k - 1) if k > 0 else 0.0)
    t2 = 3 * math.sqrt(6) * p.alpha**0.5 * p.d_max * (la + p.beta) * n**0.5 / (
        p.beta * p.d_min**1.5 * (1 - p.gamma) ** 2.5
    )
    t3 = 4 * p.d_max * la * n**0.5 / (p.beta * p.d_min**2 * (1 - p.gamma) ** 2)
    t4 = 2 * n / (1 - p.gamma) * r**k
    return t1 + t2 + t3 + t4


def trace(k: int, p: BoundParams) -> float:
    r = rho(p.alpha, p.d_min, p.gamma)
    la = math.log(p.n_actions)
    n = p.n_pairs
    first = 6 * p.alpha * (la + p.beta) ** 2 * n**2 / (p.beta**2 * p.d_min * (1 - p.gamma) ** 3)
    return first + n**2 * p.q0_gap_l2**2 * r ** (2 * k)


def noise_moment(p: BoundParams) -> float:
    la = math.log(p.n_actions)
    return 6 * (la + p.beta) ** 2 / (p.beta**2 * (1 - p.gamma) ** 2)


REFERENCE_FUNCTIONS = {
    BoundKind.LSE_LOWER: lse_lower,
    BoundKind.LSE_FINAL: lse_final,
    BoundKind.BOLTZ_LOWER: boltz_lower,
    BoundKind.BOLTZ_FINAL: boltz_final,
    BoundKind.TRACE_XK: trace,
}


def reference_grid(n_points: int = 100, seed: int = 0) -> List[Dict[str, object]]:
    """Puntos (params, k) deterministas que cubren los regimenes de interes."""
    rng = make_stream(seed, "bound-grid")
    points: List[Dict[str, object]] = []
    # punto de anclaje: MDP de dos estados, d uniforme
    anchor = BoundParams(
        alpha=0.001, beta=1000.0, gamma=0.9, d_min=0.25, d_max=0.25, n_pairs=4, n_actions=2,
        q0_gap_l2=3.0, q0_gap_linf=2.0,
    )
    points.append({"params": anchor, "k": 100_000})
    while len(points) < n_points:
        n_states = int(rng.integers(1, 6))
        n_actions = int(rng.integers(1, 5))
        n_pairs = n_states * n_actions
        if n_pairs < 2:
            continue
        weights = rng.uniform(0.2, 1.0, size=n_pairs)
        d = weights / weights.sum()
        params = BoundParams(
            alpha=float(10 ** rng.uniform(-4, -0.5)),
            beta=float(10 ** rng.uniform(-1, 4)),
            gamma=float(rng.choice([0.0, 0.5, 0.9, 0.99])),
            d_min=float(np.min(d)),
            d_max=float(np.max(d)),
            n_pairs=n_pairs,
            n_actions=n_actions,
            q0_gap_l2=float(rng.uniform(0.0, 20.0)),
            q0_gap_linf=float(rng.uniform(0.0, 10.0)),
        )
        points.append({"params": params, "k": int(rng.choice([0, 1, 10, 1_000, 50_000]))})
    return points


__all__ = [
    "REFERENCE_FUNCTIONS",
    "boltz_final",
    "boltz_lower",
    "lse_final",
    "lse_lower",
    "noise_moment",
    "reference_grid",
    "rho",
    "trace",
]
