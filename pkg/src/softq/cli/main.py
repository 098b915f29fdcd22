"""CLI `softq`: barridos, suite de aceptacion, cotas, trazas y solucion exacta."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import TypeAdapter
from pydantic import ValidationError as PydanticValidationError

from ..config import Settings
from ..connectors.random_streams import run_stream
from ..connectors.samplers import IidSampling
from ..errors import ConfigParseError, ConfigValidationError, InvalidMdpError, SoftQError
from ..models.matrices import uniform_distribution
from ..models.mdp import TabularMdp, two_state_mdp, load_mdp_file
from ..models.operators import SoftOperatorKind
from ..services.bounds_service import BoundKind, BoundParams, bound_curve
from ..services.comparison_service import co_simulate
from ..services.experiment_service import PRESETS, load_config, parse_config, run_experiment, with_overrides
from ..services.learner_service import LearnerConfig, run
from ..services.solver_service import optimal_q, soft_fixed_point
from ..services.storage_service import StorageService
from ..services.verify_service import VerifyOptions, verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

OPERATOR_ALIASES = {"lse": "lse", "boltz": "boltzmann", "boltzmann": "boltzmann", "max": "max"}


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softq", description="Soft Q-learning tabular y sus cotas de error")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("run", help="Ejecuta un barrido en beta o alpha")
    sweep.add_argument("--config", default=None, help="Documento JSON de configuracion")
    sweep.add_argument("--preset", choices=sorted(PRESETS), default=None, help="Valores base del experimento")
    sweep.add_argument("--protocol", choices=["iid", "episodic"], default=None, help="Protocolo de muestreo")
    sweep.add_argument("--out", default=None, help="Directorio de salida")
    sweep.add_argument("--seeds", type=int, default=None, help="Numero de semillas")
    sweep.add_argument("--steps", type=int, default=None, help="Pasos por corrida")
    sweep.add_argument("--workers", type=int, default=None, help="Procesos para el barrido")
    sweep.add_argument("--co-simulate", action="store_true", help="Co-simula los sistemas de comparacion")

    check = sub.add_parser("verify", help="Ejecuta la suite de aceptacion")
    check.add_argument("--quick", action="store_true", help="Tamanos reducidos")
    check.add_argument("--only", type=_int_list, default=None, help="Criterios separados por coma, e.g. 1,6,11")
    check.add_argument("--report", default=None, help="Ruta del reporte JSON")

    bounds = sub.add_parser("bounds", help="Evalua una cota sobre una grilla de pasos")
    bounds.add_argument("--kind", required=True, choices=[kind.value for kind in BoundKind])
    bounds.add_argument("--k", required=True, type=_int_list, help="Pasos separados por coma")
    bounds.add_argument("--params", required=True, help="JSON con los campos de BoundParams")
    bounds.add_argument("--out", default=None, help="CSV de salida (k,bound); por omision stdout")

    solve = sub.add_parser("solve", help="Q* exacta o punto fijo suave de un MDP")
    solve.add_argument("--mdp", default="two-state", help="Archivo JSON del MDP o 'two-state'")
    solve.add_argument("--operator", choices=sorted(OPERATOR_ALIASES), default="max")
    solve.add_argument("--beta", type=float, default=1.0)

    trace = sub.add_parser("trace", help="Una corrida del aprendiz exportada paso a paso")
    trace.add_argument("--mdp", default="two-state", help="Archivo JSON del MDP o 'two-state'")
    trace.add_argument("--operator", choices=sorted(OPERATOR_ALIASES), default="lse")
    trace.add_argument("--alpha", type=float, default=0.001)
    trace.add_argument("--beta", type=float, default=1000.0)
    trace.add_argument("--steps", type=int, default=10_000)
    trace.add_argument("--seed-index", type=int, default=0)
    trace.add_argument("--co-simulate", action="store_true", help="Exporta tambien los sistemas de comparacion")
    trace.add_argument("--out", default=None, help="Directorio de salida")
    return parser


def _run(args: argparse.Namespace, settings: Settings) -> int:
    cfg = load_config(args.config, args.preset) if args.config else parse_config("", args.preset)
    if args.workers is not None:
        workers = args.workers
    else:
        # SOFTQ_WORKERS solo cuenta si pide paralelismo
        workers = settings.workers if settings.workers > 1 else None
    cfg = with_overrides(
        cfg,
        protocol=args.protocol,
        n_seeds=args.seeds,
        n_steps=args.steps,
        workers=workers,
        seed=settings.seed,
        co_simulate=True if args.co_simulate else None,
        output_dir=args.out or (None if args.config else settings.output_dir),
    )
    results = run_experiment(cfg, Path(cfg.output_dir))
    for result in results:
        for point in result.points:
            logger.info(
                "%s %s=%g error=%.6g +/- %.3g cota=%.6g",
                result.operator,
                result.axis,
                point.sweep_value,
                point.mean_error,
                point.stderr,
                point.bound,
            )
    failed = sum(len(result.failures()) for result in results)
    if failed:
        logger.warning("%s semillas fallaron; ver *_seeds.csv", failed)
    return EXIT_OK


def _verify(args: argparse.Namespace, settings: Settings) -> int:
    only = frozenset(args.only) if args.only else None
    opts = VerifyOptions(quick=args.quick, seed=settings.base_seed, workers=settings.workers, only=only)
    report = verify(opts)
    payload = report.to_dict()
    if args.report:
        path = Path(args.report)
        StorageService(root=path.parent).save_report(payload, path.name)
    print(json.dumps(payload, indent=2))
    return EXIT_OK if report.passed else EXIT_FAILURE


def _bounds(args: argparse.Namespace) -> int:
    try:
        params = TypeAdapter(BoundParams).validate_json(Path(args.params).read_text(encoding="utf-8"))
    except (PydanticValidationError, ValueError) as exc:
        logger.error("Parametros de cota invalidos: %s", exc)
        return EXIT_USAGE
    curve = bound_curve(args.kind, args.k, params)
    if args.out:
        path = Path(args.out)
        StorageService(root=path.parent).save_bound_curve(curve.steps, curve.values, path.name)
    else:
        print("k,bound")
        for k, value in curve.pairs():
            print(f"{k},{value:.17g}")
    return EXIT_OK


def _solve(args: argparse.Namespace, settings: Settings) -> int:
    mdp = _load_mdp(args.mdp, settings)
    name = OPERATOR_ALIASES[args.operator]
    if name == "max":
        q = optimal_q(mdp)
        extra = {}
    else:
        report = soft_fixed_point(mdp, SoftOperatorKind(name, args.beta), seed=settings.base_seed)
        q = report.q
        extra = {
            "converged": report.converged,
            "multiple_fixed_points": report.multiple_fixed_points,
            "disagreement": report.disagreement,
            "limits": [witness.matrix().tolist() for _, witness in report.basin_witnesses],
        }
    print(json.dumps({"operator": name, "q": np.asarray(q.matrix()).tolist(), **extra}, indent=2))
    return EXIT_OK


def _load_mdp(ref: str, settings: Settings) -> TabularMdp:
    return two_state_mdp(strict=settings.strict) if ref == "two-state" else load_mdp_file(ref, strict=settings.strict)


def _trace(args: argparse.Namespace, settings: Settings) -> int:
    mdp = _load_mdp(args.mdp, settings)
    q_star = optimal_q(mdp)
    name = OPERATOR_ALIASES[args.operator]
    op = SoftOperatorKind.hardmax() if name == "max" else SoftOperatorKind(name, args.beta)
    cfg = LearnerConfig(
        op=op,
        alpha=args.alpha,
        n_steps=args.steps,
        sampling=IidSampling(uniform_distribution(mdp.n_states, mdp.n_actions)),
        seed=args.seed_index,
        strict=settings.strict,
    )
    rng = run_stream(settings.base_seed, args.seed_index)
    storage = StorageService(root=args.out or settings.output_dir)
    stem = f"trace_{name}_a{args.alpha:g}_b{args.beta:g}_s{args.seed_index}"
    if args.co_simulate:
        coupled = co_simulate(cfg, mdp, q_star, rng=rng)
        path = storage.save_coupled_trace(coupled, f"{stem}_coupled.csv")
        logger.info("Traza acoplada en %s (orden respetado: %s)", path, coupled.sandwich_holds())
        return EXIT_OK if coupled.sandwich_holds() else EXIT_FAILURE
    path = storage.save_learner_trace(run(cfg, mdp, rng=rng), q_star, f"{stem}.csv")
    logger.info("Traza del aprendiz en %s", path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = Settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args, settings)
        if args.command == "verify":
            return _verify(args, settings)
        if args.command == "bounds":
            return _bounds(args)
        if args.command == "trace":
            return _trace(args, settings)
        return _solve(args, settings)
    except (ConfigParseError, ConfigValidationError, InvalidMdpError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as exc:
        logger.error("Archivo no encontrado: %s", exc)
        return EXIT_USAGE
    except SoftQError as exc:
        logger.error("Error de ejecucion: %s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
