"""Configuracion de experimentos y barridos en beta o alpha sobre varias semillas."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..connectors.random_streams import run_stream
from ..connectors.samplers import IidSampling, SamplingMode, TrajectorySampling
from ..errors import ConfigParseError, ConfigValidationError
from ..models.distribution import empirical_distribution
from ..models.matrices import uniform_distribution
from ..models.mdp import TabularMdp, two_state_mdp, load_mdp_file
from ..models.operators import OperatorName, SoftOperatorKind
from ..models.qtable import QTable
from ..models.trace import SeedOutcome, SweepPoint, SweepResult
from .bounds_service import BoundMode, BoundParams, evaluate, final_bound_kind
from .comparison_service import co_simulate
from .learner_service import TAIL_FRACTION, LearnerConfig, run
from .plot_service import PlotService
from .solver_service import optimal_q
from .storage_service import StorageService

logger = logging.getLogger(__name__)

TWO_STATE_MDP = "two-state"
BETA_GRID = [10.0, 100.0, 1000.0, 10000.0]
ALPHA_GRID = [1e-4, 1e-3, 1e-2]


class SweepAxis(BaseModel):
    model_config = ConfigDict(extra="forbid")

    axis: Literal["beta", "alpha"] = "beta"
    values: List[float] = Field(default_factory=lambda: list(BETA_GRID), min_length=1)

    @field_validator("values")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        for value in values:
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"los valores del barrido deben ser positivos, llego {value}")
        return values

    @model_validator(mode="after")
    def _alpha_range(self) -> "SweepAxis":
        if self.axis == "alpha":
            for value in self.values:
                if not value < 1.0:
                    raise ValueError(f"alpha={value} fuera de (0, 1)")
        return self


class ExperimentConfig(BaseModel):
    """Documento de configuracion de un experimento; por omision, barrido en beta con el MDP de dos estados."""

    model_config = ConfigDict(extra="forbid")

    label: str = "beta_sweep"
    mdp: str = TWO_STATE_MDP
    algorithm: Literal["lse", "boltzmann", "both"] = "both"
    sweep: SweepAxis = Field(default_factory=SweepAxis)
    fixed: float = 0.001
    n_seeds: int = Field(default=10, ge=1)
    n_steps: int = Field(default=100_000, ge=0)
    protocol: Literal["iid", "episodic"] = "iid"
    output_dir: str = "results"
    bound_mode: Literal["measured-gap", "worst-case"] = "measured-gap"
    seed: int = Field(default=0, ge=0)
    co_simulate: bool = False
    common_random_numbers: bool = True
    strict: bool = True
    workers: int = Field(default=1, ge=1)

    @field_validator("fixed")
    @classmethod
    def _fixed_parameter(cls, value: float, info: ValidationInfo) -> float:
        sweep = info.data.get("sweep")
        axis = sweep.axis if sweep is not None else "beta"
        if axis == "beta" and not 0.0 < value < 1.0:
            raise ValueError(f"alpha={value} fuera de (0, 1)")
        if axis == "alpha" and not (math.isfinite(value) and value > 0):
            raise ValueError(f"beta={value} debe ser positivo")
        return value

    def operator_names(self) -> List[OperatorName]:
        if self.algorithm == "both":
            return [OperatorName.LSE, OperatorName.BOLTZMANN]
        return [OperatorName(self.algorithm)]

    def point_parameters(self, value: float) -> Tuple[float, float]:
        """(alpha, beta) de un punto del barrido."""
        if self.sweep.axis == "beta":
            return self.fixed, value
        return value, self.fixed


PRESETS: Dict[str, Dict[str, Any]] = {
    "beta-sweep-lse": {
        "label": "beta_sweep",
        "algorithm": "lse",
        "sweep": {"axis": "beta", "values": BETA_GRID},
        "fixed": 0.001,
    },
    "beta-sweep-boltz": {
        "label": "beta_sweep",
        "algorithm": "boltzmann",
        "sweep": {"axis": "beta", "values": BETA_GRID},
        "fixed": 0.001,
    },
    "alpha-sweep-lse": {
        "label": "alpha_sweep",
        "algorithm": "lse",
        "sweep": {"axis": "alpha", "values": ALPHA_GRID},
        "fixed": 1000.0,
    },
    "alpha-sweep-boltz": {
        "label": "alpha_sweep",
        "algorithm": "boltzmann",
        "sweep": {"axis": "alpha", "values": ALPHA_GRID},
        "fixed": 1000.0,
    },
}


def _validation_error(exc: PydanticValidationError) -> ConfigValidationError:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "config"
    return ConfigValidationError(field, first["msg"])


def parse_config(text: str, preset: Optional[str] = None) -> ExperimentConfig:
    """Documento JSON (posiblemente vacio) sobre los valores del preset."""
    payload: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigValidationError("preset", f"preset desconocido {preset!r}")
        payload.update(json.loads(json.dumps(PRESETS[preset])))
    if text.strip():
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"Configuracion invalida: {exc.msg}", exc.lineno, exc.colno) from exc
        if not isinstance(document, dict):
            raise ConfigParseError("La configuracion debe ser un objeto JSON", 1, 1)
        payload.update(document)
    try:
        return ExperimentConfig.model_validate(payload)
    except PydanticValidationError as exc:
        raise _validation_error(exc) from exc


def load_config(path: str | Path, preset: Optional[str] = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), preset)


def serialize_config(cfg: ExperimentConfig) -> str:
    return cfg.model_dump_json(indent=2)


def with_overrides(cfg: ExperimentConfig, **updates: Any) -> ExperimentConfig:
    """Copia validada con los campos indicados (los None se ignoran)."""
    payload = cfg.model_dump()
    payload.update({key: value for key, value in updates.items() if value is not None})
    try:
        return ExperimentConfig.model_validate(payload)
    except PydanticValidationError as exc:
        raise _validation_error(exc) from exc


@lru_cache(maxsize=8)
def _problem(mdp_ref: str, strict: bool) -> Tuple[TabularMdp, QTable]:
    mdp = two_state_mdp(strict=strict) if mdp_ref == TWO_STATE_MDP else load_mdp_file(mdp_ref, strict=strict)
    return mdp, optimal_q(mdp)


def load_problem(cfg: ExperimentConfig) -> Tuple[TabularMdp, QTable]:
    """MDP del experimento y su Q* (cacheados por proceso)."""
    return _problem(cfg.mdp, cfg.strict)


def make_operator(name: OperatorName, beta: float) -> SoftOperatorKind:
    return SoftOperatorKind(name, beta)


def _sampling(cfg: ExperimentConfig, mdp: TabularMdp) -> SamplingMode:
    if cfg.protocol == "iid":
        return IidSampling(uniform_distribution(mdp.n_states, mdp.n_actions))
    return TrajectorySampling(initial_distribution=mdp.initial_distribution)


def _tail_error(deviations: np.ndarray) -> float:
    tail = max(1, math.ceil(TAIL_FRACTION * (deviations.shape[0] - 1)))
    return float(np.max(np.abs(deviations[-tail:].mean(axis=0))))


def run_seed(cfg: ExperimentConfig, name: OperatorName, point_index: int, seed_index: int) -> Tuple[SeedOutcome, np.ndarray]:
    """Una corrida del aprendiz; devuelve el resultado y la d usada para la cota."""
    mdp, q_star = load_problem(cfg)
    value = cfg.sweep.values[point_index]
    alpha, beta = cfg.point_parameters(value)
    op = make_operator(name, beta)
    rng = run_stream(cfg.seed, seed_index, point_index, cfg.common_random_numbers)
    sampling = _sampling(cfg, mdp)
    learner_cfg = LearnerConfig(op=op, alpha=alpha, n_steps=cfg.n_steps, sampling=sampling, seed=seed_index, strict=cfg.strict)

    if cfg.co_simulate and isinstance(sampling, IidSampling):
        coupled = co_simulate(learner_cfg, mdp, q_star, rng=rng)
        outcome = SeedOutcome(
            point_index=point_index,
            sweep_value=value,
            seed_index=seed_index,
            final_error=float(np.max(np.abs(coupled.x_learner[-1]))),
            tail_error=_tail_error(coupled.x_learner),
            n_steps=cfg.n_steps,
            sandwich_holds=coupled.sandwich_holds(),
        )
        return outcome, sampling.d

    trace = run(learner_cfg, mdp, rng=rng)
    if isinstance(sampling, IidSampling):
        d = sampling.d
    elif trace.n_steps:
        d = empirical_distribution(trace.states, trace.actions, mdp.n_states, mdp.n_actions)
    else:
        d = uniform_distribution(mdp.n_states, mdp.n_actions)
    outcome = SeedOutcome(
        point_index=point_index,
        sweep_value=value,
        seed_index=seed_index,
        final_error=float(np.max(np.abs(trace.final_q - q_star))),
        tail_error=float(np.max(np.abs(trace.tail_mean_q - q_star.values))),
        n_steps=cfg.n_steps,
        assumption_violations=tuple(trace.assumption_violations),
    )
    return outcome, d


def _seed_task(args: Tuple[str, str, int, int]) -> Tuple[SeedOutcome, Optional[List[float]]]:
    cfg_json, name, point_index, seed_index = args
    cfg = ExperimentConfig.model_validate_json(cfg_json)
    value = cfg.sweep.values[point_index]
    try:
        outcome, d = run_seed(cfg, OperatorName(name), point_index, seed_index)
    except Exception as exc:  # noqa: BLE001 - la corrida sigue con las demas semillas
        logger.error("Fallo la semilla %s en %s=%s: %s", seed_index, cfg.sweep.axis, value, exc)
        failed = SeedOutcome(
            point_index=point_index,
            sweep_value=value,
            seed_index=seed_index,
            final_error=math.nan,
            tail_error=math.nan,
            n_steps=cfg.n_steps,
            failure=f"{type(exc).__name__}: {exc}",
        )
        return failed, None
    return outcome, d.tolist()


def _execute(tasks: List[Tuple[str, str, int, int]], workers: int) -> List[Tuple[SeedOutcome, Optional[List[float]]]]:
    if workers <= 1 or len(tasks) <= 1:
        return [_seed_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map conserva el orden de las tareas
        return list(pool.map(_seed_task, tasks))


def point_bound(
    cfg: ExperimentConfig,
    name: OperatorName,
    value: float,
    d_min: float,
    d_max: float,
    mdp: TabularMdp,
    q_star: QTable,
) -> float:
    alpha, beta = cfg.point_parameters(value)
    base = dict(
        alpha=alpha,
        beta=beta,
        gamma=mdp.discount,
        d_min=d_min,
        d_max=d_max,
        n_pairs=mdp.n_pairs,
        n_actions=mdp.n_actions,
    )
    try:
        if BoundMode(cfg.bound_mode) is BoundMode.WORST_CASE:
            params = BoundParams.worst_case(**base)
        else:
            gap = np.zeros(mdp.n_pairs) - q_star.values
            params = BoundParams(
                **base,
                q0_gap_l2=float(np.linalg.norm(gap)),
                q0_gap_linf=float(np.max(np.abs(gap))),
            )
    except ValueError as exc:
        logger.warning("Cota no evaluable en %s=%s: %s", cfg.sweep.axis, value, exc)
        return math.nan
    return float(evaluate(final_bound_kind(name), cfg.n_steps, params))


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def run_sweep(cfg: ExperimentConfig, name: OperatorName | str | None = None) -> SweepResult:
    """Barrido completo de un operador; determinista dada la semilla base."""
    names = cfg.operator_names()
    name = OperatorName(name) if name is not None else names[0]
    mdp, q_star = load_problem(cfg)
    cfg_json = cfg.model_dump_json()
    tasks = [
        (cfg_json, name.value, point_index, seed_index)
        for point_index in range(len(cfg.sweep.values))
        for seed_index in range(cfg.n_seeds)
    ]
    logger.info(
        "Barrido %s %s: %s puntos x %s semillas, %s pasos",
        cfg.label,
        name.value,
        len(cfg.sweep.values),
        cfg.n_seeds,
        cfg.n_steps,
    )
    results = _execute(tasks, cfg.workers)

    seeds: List[SeedOutcome] = []
    points: List[SweepPoint] = []
    for point_index, value in enumerate(cfg.sweep.values):
        chunk = [item for item in results if item[0].point_index == point_index]
        outcomes = [outcome for outcome, _ in chunk]
        seeds.extend(outcomes)
        good = [(outcome, d) for outcome, d in chunk if outcome.ok and d is not None]
        if len(good) < len(chunk):
            logger.warning("%s semillas fallidas en %s=%s", len(chunk) - len(good), cfg.sweep.axis, value)
        errors = np.array([outcome.final_error for outcome, _ in good])
        tails = np.array([outcome.tail_error for outcome, _ in good])
        if good:
            d_min = min(float(np.min(d)) for _, d in good)
            d_max = max(float(np.max(d)) for _, d in good)
            bound = point_bound(cfg, name, value, d_min, d_max, mdp, q_star)
        else:
            d_min = d_max = bound = math.nan
        points.append(
            SweepPoint(
                sweep_value=value,
                mean_error=float(errors.mean()) if errors.size else math.nan,
                stderr=_stderr(errors),
                bound=bound,
                n_seeds=len(good),
                n_steps=cfg.n_steps,
                mean_tail_error=float(tails.mean()) if tails.size else math.nan,
                d_min=d_min,
                d_max=d_max,
            )
        )
    return SweepResult(
        label=cfg.label,
        operator=name.value,
        axis=cfg.sweep.axis,
        points=points,
        seeds=seeds,
        protocol=cfg.protocol,
        bound_mode=cfg.bound_mode,
    )


def run_experiment(cfg: ExperimentConfig, output_dir: str | Path | None = None) -> List[SweepResult]:
    """Un barrido por operador; con output_dir escribe CSV, SVG y config.json."""
    results = [run_sweep(cfg, name) for name in cfg.operator_names()]
    if output_dir is not None:
        storage = StorageService(root=output_dir)
        plots = PlotService()
        storage.save_config(cfg)
        for result in results:
            storage.save_sweep(result)
            storage.save_seeds(result)
            storage.save_text(plots.sweep_figure(result), f"{result.label}_{result.operator}.svg")
    return results


__all__ = [
    "ALPHA_GRID",
    "BETA_GRID",
    "ExperimentConfig",
    "PRESETS",
    "SweepAxis",
    "load_config",
    "load_problem",
    "make_operator",
    "parse_config",
    "point_bound",
    "run_experiment",
    "run_seed",
    "run_sweep",
    "serialize_config",
    "with_overrides",
]
