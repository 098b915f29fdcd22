"""Fuentes de transiciones y flujos aleatorios."""

from .random_streams import make_stream, run_stream
from .samplers import (
    IidSampler,
    IidSampling,
    SamplingMode,
    TrajectorySampler,
    TrajectorySampling,
    TransitionSampler,
    build_sampler,
    sample_transition,
)

__all__ = [
    "IidSampler",
    "IidSampling",
    "SamplingMode",
    "TrajectorySampler",
    "TrajectorySampling",
    "TransitionSampler",
    "build_sampler",
    "make_stream",
    "run_stream",
    "sample_transition",
]
