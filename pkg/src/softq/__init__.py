"""Soft Q-learning tabular (LSE y Boltzmann), sistemas de comparacion y cotas de error."""

from .config import Settings
from .errors import (
    AssumptionViolation,
    ConfigParseError,
    ConfigValidationError,
    InvalidMdpError,
    NotConverged,
    SandwichViolation,
    SoftQError,
)
from .models import QTable, SoftOperatorKind, TabularMdp, two_state_mdp
from .services import (
    BoundParams,
    ExperimentConfig,
    LearnerConfig,
    co_simulate,
    optimal_q,
    run,
    run_sweep,
    verify,
)

__all__ = [
    "AssumptionViolation",
    "BoundParams",
    "ConfigParseError",
    "ConfigValidationError",
    "ExperimentConfig",
    "InvalidMdpError",
    "LearnerConfig",
    "NotConverged",
    "QTable",
    "SandwichViolation",
    "Settings",
    "SoftOperatorKind",
    "SoftQError",
    "TabularMdp",
    "co_simulate",
    "two_state_mdp",
    "optimal_q",
    "run",
    "run_sweep",
    "verify",
]
