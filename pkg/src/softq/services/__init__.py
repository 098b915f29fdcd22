"""Servicios disponibles."""

from .bounds_service import BoundCurve, BoundKind, BoundParams, bound_curve, decay_rate
from .comparison_service import co_simulate, switching_matrices
from .experiment_service import ExperimentConfig, parse_config, run_experiment, run_sweep, serialize_config
from .learner_service import LearnerConfig, run, step
from .plot_service import PlotService, emit_plot
from .solver_service import optimal_q, policy_enumeration_q, soft_fixed_point
from .storage_service import CsvStorageBackend, StorageBackend, StorageService, emit_csv
from .verify_service import VerifyOptions, VerifyReport, verify

__all__ = [
    "BoundCurve",
    "BoundKind",
    "BoundParams",
    "CsvStorageBackend",
    "ExperimentConfig",
    "LearnerConfig",
    "PlotService",
    "StorageBackend",
    "StorageService",
    "VerifyOptions",
    "VerifyReport",
    "bound_curve",
    "co_simulate",
    "decay_rate",
    "emit_csv",
    "emit_plot",
    "optimal_q",
    "parse_config",
    "policy_enumeration_q",
    "run",
    "run_experiment",
    "run_sweep",
    "serialize_config",
    "soft_fixed_point",
    "step",
    "switching_matrices",
    "verify",
]
