"""Suite de aceptacion de extremo a extremo (criterios 1 a 13).

Cada criterio devuelve el valor medido, el umbral y si se cumple. Los
errores dentro de un criterio se reportan como fallo, nunca se propagan.
"""
from __future__ import annotations

import logging
import math
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional

import numpy as np

from ..connectors.random_streams import make_stream
from ..connectors.samplers import IidSampling
from ..models.matrices import assemble_matrices, uniform_distribution
from ..models.mdp import two_state_mdp
from ..models.operators import OperatorName, SoftOperatorKind, soft_values
from ..models.qtable import QTable
from . import bounds_service
from .bounds_reference import REFERENCE_FUNCTIONS, noise_moment, reference_grid, rho
from .comparison_service import co_simulate
from .experiment_service import PRESETS, ExperimentConfig, point_bound, run_experiment, run_sweep
from .learner_service import LearnerConfig, expected_noise, noise_moments
from .solver_service import lse_fixed_point_gap_bound, optimal_q, policy_enumeration_q, soft_fixed_point

logger = logging.getLogger(__name__)

ENVELOPE_SLACK = 1e-12
SANDWICH_TOLERANCE = 1e-9
ITERATE_SLACK = 1e-12
ZERO_MEAN_TOLERANCE = 1e-12
Q_STAR_TOLERANCE = 1e-9
DUAL_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-12
FULL_STEPS = 100_000


@dataclass(slots=True)
class CriterionResult:
    id: int
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, object]:
        payload = asdict(self)
        if not math.isfinite(self.measured):
            payload["measured"] = None
        return payload


@dataclass(slots=True)
class VerifyReport:
    quick: bool
    seed: int
    criteria: List[CriterionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.criteria)

    def failures(self) -> List[CriterionResult]:
        return [item for item in self.criteria if not item.passed]

    def to_dict(self) -> Dict[str, object]:
        return {
            "quick": self.quick,
            "seed": self.seed,
            "passed": self.passed,
            "criteria": [item.to_dict() for item in self.criteria],
        }


@dataclass(frozen=True, slots=True)
class VerifyOptions:
    """Tamanos de la suite; quick los reduce para ejecuciones de humo."""

    quick: bool = False
    seed: int = 0
    workers: int = 1
    only: Optional[FrozenSet[int]] = None

    def size(self, full: int, reduced: int) -> int:
        return reduced if self.quick else full


def _envelopes(opts: VerifyOptions) -> CriterionResult:
    rng = make_stream(opts.seed, "verify-envelopes")
    n_vectors = opts.size(10_000, 1_000)
    worst = math.inf
    for beta in (0.1, 1.0, 10.0, 1000.0):
        for dim in range(1, 17):
            v = rng.uniform(-10.0, 10.0, size=(n_vectors, dim))
            peak = v.max(axis=1)
            bias = math.log(dim) / beta
            lse = soft_values(v, SoftOperatorKind.lse(beta))
            boltz = soft_values(v, SoftOperatorKind.boltzmann(beta))
            worst = min(
                worst,
                float(np.min(lse - peak)),
                float(np.min(peak + bias - lse)),
                float(np.min(boltz - (peak - bias))),
                float(np.min(peak - boltz)),
            )
    return CriterionResult(1, "operator-envelopes", worst, -ENVELOPE_SLACK, worst >= -ENVELOPE_SLACK,
                           f"{n_vectors} vectores por (beta, dim)")


def _sandwich_runs(opts: VerifyOptions) -> List:
    mdp = two_state_mdp()
    q_star = optimal_q(mdp)
    n_steps = opts.size(10_000, 1_000)
    n_seeds = opts.size(5, 2)
    traces = []
    for name in (OperatorName.LSE, OperatorName.BOLTZMANN):
        for alpha in (0.01, 0.001):
            for beta in (10.0, 1000.0):
                for seed in range(n_seeds):
                    cfg = LearnerConfig(
                        op=SoftOperatorKind(name, beta),
                        alpha=alpha,
                        n_steps=n_steps,
                        sampling=IidSampling(uniform_distribution(mdp.n_states, mdp.n_actions)),
                        seed=seed,
                    )
                    rng = make_stream(opts.seed, "verify-sandwich", name.value, int(beta), seed, round(1 / alpha))
                    traces.append(co_simulate(cfg, mdp, q_star, rng=rng))
    return traces


def _sandwich(opts: VerifyOptions, traces: List) -> CriterionResult:
    worst = min(
        min(float(np.min(t.lower_min_slack())), float(np.min(t.upper_min_slack()))) for t in traces
    )
    failing = sum(1 for t in traces if t.violations)
    return CriterionResult(2, "sandwich-ordering", worst, -SANDWICH_TOLERANCE, worst >= -SANDWICH_TOLERANCE,
                           f"{len(traces)} co-simulaciones, {failing} con violaciones")


def _iterate_bound(opts: VerifyOptions, traces: List) -> CriterionResult:
    mdp = two_state_mdp()
    worst = -math.inf
    for t in traces:
        params = bounds_service.BoundParams(
            alpha=t.alpha, beta=t.beta, gamma=mdp.discount, d_min=0.25, d_max=0.25,
            n_pairs=mdp.n_pairs, n_actions=mdp.n_actions,
        )
        iterates = t.q_star.values[None, :] + t.x_learner
        worst = max(worst, float(np.max(np.abs(iterates))) - bounds_service.iterate_bound(params))
    return CriterionResult(3, "iterate-boundedness", worst, ITERATE_SLACK, worst <= ITERATE_SLACK,
                           "max ||Q_k||_inf menos la cota")


def _zero_mean(opts: VerifyOptions) -> CriterionResult:
    mdp = two_state_mdp()
    mm = assemble_matrices(mdp, uniform_distribution(mdp.n_states, mdp.n_actions))
    rng = make_stream(opts.seed, "verify-zero-mean")
    box = 1.0 / (1.0 - mdp.discount)
    worst = 0.0
    for _ in range(opts.size(100, 20)):
        q = QTable(rng.uniform(-box, box, size=mdp.n_pairs), mdp.n_states, mdp.n_actions)
        for op in (SoftOperatorKind.lse(10.0), SoftOperatorKind.boltzmann(10.0)):
            worst = max(worst, float(np.max(np.abs(expected_noise(q, op, mdp, mm)))))
    return CriterionResult(4, "zero-mean-noise", worst, ZERO_MEAN_TOLERANCE, worst <= ZERO_MEAN_TOLERANCE)


def _second_moment(opts: VerifyOptions) -> CriterionResult:
    mdp = two_state_mdp()
    mm = assemble_matrices(mdp, uniform_distribution(mdp.n_states, mdp.n_actions))
    rng = make_stream(opts.seed, "verify-second-moment")
    n_samples = opts.size(100_000, 10_000)
    box = 1.0 / (1.0 - mdp.discount)
    worst = -math.inf
    for _ in range(10):
        q = QTable(rng.uniform(-box, box, size=mdp.n_pairs), mdp.n_states, mdp.n_actions)
        for beta in (10.0, 1000.0):
            params = bounds_service.BoundParams(
                alpha=0.5, beta=beta, gamma=mdp.discount, d_min=mm.d_min, d_max=mm.d_max,
                n_pairs=mdp.n_pairs, n_actions=mdp.n_actions,
            )
            limit = bounds_service.noise_moment_bound(params)
            for op in (SoftOperatorKind.lse(beta), SoftOperatorKind.boltzmann(beta)):
                moments = noise_moments(q, op, mdp, mm, n_samples, rng)
                worst = max(worst, (moments.second_moment - 3.0 * moments.second_moment_stderr) / limit)
    return CriterionResult(5, "noise-second-moment", worst, 1.0, worst <= 1.0,
                           f"{n_samples} muestras; medido = (E[w'w] - 3 sigma) / cota")


def _ground_truth(opts: VerifyOptions) -> CriterionResult:
    mdp = two_state_mdp()
    q_star = optimal_q(mdp)
    oracle = policy_enumeration_q(mdp)
    gap = float(np.max(np.abs(q_star - oracle)))
    norm = q_star.linf()
    passed = gap <= Q_STAR_TOLERANCE and norm <= 1.0 / (1.0 - mdp.discount)
    return CriterionResult(6, "q-star-ground-truth", gap, Q_STAR_TOLERANCE, passed,
                           f"||Q*||_inf = {norm:.6f}")


def _lse_gap(opts: VerifyOptions) -> CriterionResult:
    mdp = two_state_mdp()
    q_star = optimal_q(mdp)
    worst = -math.inf
    parts = []
    for beta in (10.0, 100.0, 1000.0):
        report = soft_fixed_point(mdp, SoftOperatorKind.lse(beta))
        gap = float(np.max(np.abs(report.q - q_star)))
        limit = float(lse_fixed_point_gap_bound(mdp.discount, beta, mdp.n_actions))
        worst = max(worst, gap / limit)
        parts.append(f"beta={beta:g}: {gap:.4g} <= {limit:.4g}")
    return CriterionResult(7, "lse-fixed-point-gap", worst, 1.0, worst <= 1.0, "; ".join(parts))


def _preset_config(preset: str, opts: VerifyOptions) -> ExperimentConfig:
    payload = dict(PRESETS[preset])
    payload.update(
        n_seeds=opts.size(10, 3),
        n_steps=opts.size(FULL_STEPS, 10_000),
        seed=opts.seed,
        workers=opts.workers,
    )
    return ExperimentConfig.model_validate(payload)


def _dominance(opts: VerifyOptions, sweeps: Dict[str, object]) -> CriterionResult:
    missing = [p for p in PRESETS if p not in sweeps]
    if missing:
        return CriterionResult(8, "bound-dominance", math.nan, 1.0, False, f"barridos faltantes: {missing}")
    worst = -math.inf
    for result in sweeps.values():
        ratio = result.mean_errors / result.bounds
        worst = max(worst, float(np.max(ratio)))
    return CriterionResult(8, "bound-dominance", worst, 1.0, bool(worst <= 1.0),
                           "max error medio / cota en k = n_steps")


def _final_bounds(preset: str) -> np.ndarray:
    cfg = ExperimentConfig.model_validate(PRESETS[preset])
    mdp = two_state_mdp()
    q_star = optimal_q(mdp)
    d = uniform_distribution(mdp.n_states, mdp.n_actions)
    name = cfg.operator_names()[0]
    return np.array([
        point_bound(cfg, name, value, float(d.min()), float(d.max()), mdp, q_star)
        for value in cfg.sweep.values
    ])


def _beta_trend(opts: VerifyOptions, sweeps: Dict[str, object]) -> CriterionResult:
    lse = sweeps["beta-sweep-lse"]
    mean, se = lse.mean_errors, lse.stderrs
    excess = mean[1:] - mean[:-1] - 2.0 * np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
    worst = float(np.max(excess)) if excess.size else -math.inf
    bounds_ok = all(np.all(np.diff(_final_bounds(p)) < 0) for p in ("beta-sweep-lse", "beta-sweep-boltz"))
    boltz = sweeps.get("beta-sweep-boltz")
    detail = "error Boltzmann: " + ", ".join(f"{v:.4g}" for v in boltz.mean_errors) if boltz else ""
    return CriterionResult(9, "beta-trend", worst, 0.0, worst <= 0.0 and bounds_ok,
                           f"cotas decrecientes en beta: {bounds_ok}; {detail}")


def _alpha_trend(opts: VerifyOptions) -> CriterionResult:
    diffs = [np.diff(_final_bounds(p)) for p in ("alpha-sweep-lse", "alpha-sweep-boltz")]
    worst = float(min(np.min(d) for d in diffs))
    return CriterionResult(10, "alpha-trend", worst, 0.0, worst > 0.0, "minimo incremento de la cota en alpha")


def _dual_implementation(opts: VerifyOptions) -> CriterionResult:
    worst = 0.0
    for point in reference_grid(100, seed=opts.seed):
        params, k = point["params"], point["k"]
        pairs = [
            (float(bounds_service.evaluate(kind, k, params)), reference(k, params))
            for kind, reference in REFERENCE_FUNCTIONS.items()
        ]
        pairs.append((bounds_service.noise_moment_bound(params), noise_moment(params)))
        pairs.append((bounds_service.decay_rate(params), rho(params.alpha, params.d_min, params.gamma)))
        for produced, expected in pairs:
            worst = max(worst, abs(produced - expected) / max(abs(expected), 1e-300))
    anchor = bounds_service.BoundParams(
        alpha=0.001, beta=1000.0, gamma=0.9, d_min=0.25, d_max=0.25, n_pairs=4, n_actions=2
    )
    rho_ok = abs(bounds_service.decay_rate(anchor) - 0.999975) <= 1e-12
    noise_ok = abs(bounds_service.noise_moment_bound(anchor) - 600.832) <= 1e-3
    passed = worst <= DUAL_TOLERANCE and rho_ok and noise_ok
    return CriterionResult(11, "dual-implementation", worst, DUAL_TOLERANCE, passed,
                           f"anclas rho={rho_ok} ruido={noise_ok}")


def _error_identity(opts: VerifyOptions) -> CriterionResult:
    mdp = two_state_mdp()
    q_star = optimal_q(mdp)
    worst = 0.0
    for name in (OperatorName.LSE, OperatorName.BOLTZMANN):
        cfg = LearnerConfig(
            op=SoftOperatorKind(name, 10.0),
            alpha=0.5,
            n_steps=1_000,
            sampling=IidSampling(uniform_distribution(mdp.n_states, mdp.n_actions)),
        )
        trace = co_simulate(cfg, mdp, q_star, rng=make_stream(opts.seed, "verify-identity", name.value))
        worst = max(worst, float(np.max(np.abs(trace.error_system - (trace.x_upper - trace.x_lower)))))
    return CriterionResult(12, "error-system-identity", worst, IDENTITY_TOLERANCE, worst <= IDENTITY_TOLERANCE)


def _determinism(opts: VerifyOptions) -> CriterionResult:
    payload = dict(PRESETS["beta-sweep-lse"])
    payload.update(n_seeds=2, n_steps=opts.size(5_000, 500), seed=opts.seed)
    cfg = ExperimentConfig.model_validate(payload)
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        run_experiment(cfg, first)
        run_experiment(cfg, second)
        names = sorted(p.name for p in Path(first).glob("*.csv"))
        differing = [n for n in names if (Path(first) / n).read_bytes() != (Path(second) / n).read_bytes()]
    return CriterionResult(13, "determinism", float(len(differing)), 0.0, not differing and bool(names),
                           f"{len(names)} CSV comparados")


def _guarded(criterion_id: int, name: str, fn: Callable[[], CriterionResult]) -> CriterionResult:
    started = time.perf_counter()
    try:
        result = fn()
    except Exception as exc:  # noqa: BLE001 - el reporte registra el fallo
        logger.error("Criterio %s (%s) fallo con excepcion: %s", criterion_id, name, exc)
        result = CriterionResult(criterion_id, name, math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")
    logger.info(
        "Criterio %s %s: %s (%.2fs)", criterion_id, name, "ok" if result.passed else "FALLA",
        time.perf_counter() - started,
    )
    return result


def verify(opts: VerifyOptions | None = None) -> VerifyReport:
    """Ejecuta los criterios seleccionados (todos por omision)."""
    opts = opts or VerifyOptions()
    wanted = opts.only or frozenset(range(1, 14))
    report = VerifyReport(quick=opts.quick, seed=opts.seed)
    add = report.criteria.append

    if 1 in wanted:
        add(_guarded(1, "operator-envelopes", lambda: _envelopes(opts)))
    if wanted & {2, 3}:
        traces: List = []
        try:
            traces = _sandwich_runs(opts)
        except Exception as exc:  # noqa: BLE001
            logger.error("Co-simulaciones fallidas: %s", exc)
        if 2 in wanted:
            add(_guarded(2, "sandwich-ordering", lambda: _sandwich(opts, traces)))
        if 3 in wanted:
            add(_guarded(3, "iterate-boundedness", lambda: _iterate_bound(opts, traces)))
    if 4 in wanted:
        add(_guarded(4, "zero-mean-noise", lambda: _zero_mean(opts)))
    if 5 in wanted:
        add(_guarded(5, "noise-second-moment", lambda: _second_moment(opts)))
    if 6 in wanted:
        add(_guarded(6, "q-star-ground-truth", lambda: _ground_truth(opts)))
    if 7 in wanted:
        add(_guarded(7, "lse-fixed-point-gap", lambda: _lse_gap(opts)))
    if wanted & {8, 9}:
        sweeps: Dict[str, object] = {}
        for preset in ("beta-sweep-lse", "beta-sweep-boltz", "alpha-sweep-lse", "alpha-sweep-boltz"):
            if 8 not in wanted and not preset.startswith("beta-sweep"):
                continue
            try:
                sweeps[preset] = run_sweep(_preset_config(preset, opts))
            except Exception as exc:  # noqa: BLE001
                logger.error("Barrido %s fallido: %s", preset, exc)
        if 8 in wanted:
            add(_guarded(8, "bound-dominance", lambda: _dominance(opts, sweeps)))
        if 9 in wanted:
            add(_guarded(9, "beta-trend", lambda: _beta_trend(opts, sweeps)))
    if 10 in wanted:
        add(_guarded(10, "alpha-trend", lambda: _alpha_trend(opts)))
    if 11 in wanted:
        add(_guarded(11, "dual-implementation", lambda: _dual_implementation(opts)))
    if 12 in wanted:
        add(_guarded(12, "error-system-identity", lambda: _error_identity(opts)))
    if 13 in wanted:
        add(_guarded(13, "determinism", lambda: _determinism(opts)))
    return report


__all__ = ["CriterionResult", "VerifyOptions", "VerifyReport", "verify"]
