"""Modelos de datos."""
from .distribution import empirical_distribution, stationary_state_action
from .matrices import (
    ModelMatrices,
    assemble_matrices,
    greedy_selector,
    policy_matrix,
    uniform_distribution,
)
from .mdp import MdpSpec, StochasticPolicy, TabularMdp, build_mdp, two_state_mdp
from .operators import (
    OperatorName,
    SoftOperatorKind,
    operator_envelope,
    soft_backup,
    soft_value,
)
from .qtable import QTable, flat_index
from .trace import CoupledTrace, LearnerTrace, NoiseVector, SeedOutcome, SweepPoint, SweepResult, Transition

__all__ = [
    "CoupledTrace",
    "LearnerTrace",
    "MdpSpec",
    "ModelMatrices",
    "NoiseVector",
    "OperatorName",
    "QTable",
    "SoftOperatorKind",
    "SeedOutcome",
    "StochasticPolicy",
    "SweepPoint",
    "SweepResult",
    "TabularMdp",
    "Transition",
    "assemble_matrices",
    "build_mdp",
    "empirical_distribution",
    "two_state_mdp",
    "flat_index",
    "greedy_selector",
    "operator_envelope",
    "policy_matrix",
    "soft_backup",
    "soft_value",
    "stationary_state_action",
    "uniform_distribution",
]
