"""Servicio de persistencia de resultados en archivos CSV, SVG y JSON."""
from __future__ import annotations

import json
import logging
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Mapping

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..models.qtable import QTable
from ..models.trace import CoupledTrace, LearnerTrace, SweepResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SWEEP_COLUMNS = ["sweep_value", "mean_error", "stderr", "bound", "n_seeds", "n_steps"]


class StorageBackend(ABC):
    @abstractmethod
    def write_table(self, frame: pd.DataFrame, name: str) -> Path:
        raise NotImplementedError

    @abstractmethod
    def read_table(self, name: str) -> pd.DataFrame:
        raise NotImplementedError

    @abstractmethod
    def write_text(self, text: str, name: str) -> Path:
        raise NotImplementedError


class CsvStorageBackend(StorageBackend):
    """Backend que escribe tablas CSV y textos bajo un directorio raiz."""

    def __init__(self, root: str | Path) -> None:
        self._root = Path(root)
        self._root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @property
    def root(self) -> Path:
        return self._root

    def _path(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self._root / path

    def write_table(self, frame: pd.DataFrame, name: str) -> Path:
        path = self._path(name)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return path

    def read_table(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self._path(name), float_precision="round_trip")

    def write_text(self, text: str, name: str) -> Path:
        path = self._path(name)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        return path


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    rows = sorted(result.points, key=lambda point: point.sweep_value)
    return pd.DataFrame(
        {
            "sweep_value": [p.sweep_value for p in rows],
            "mean_error": [p.mean_error for p in rows],
            "stderr": [p.stderr for p in rows],
            "bound": [p.bound for p in rows],
            "n_seeds": [p.n_seeds for p in rows],
            "n_steps": [p.n_steps for p in rows],
        },
        columns=SWEEP_COLUMNS,
    )


def seeds_frame(result: SweepResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "sweep_value": [o.sweep_value for o in result.seeds],
            "seed_index": [o.seed_index for o in result.seeds],
            "final_error": [o.final_error for o in result.seeds],
            "tail_error": [o.tail_error for o in result.seeds],
            "n_steps": [o.n_steps for o in result.seeds],
            "sandwich_holds": ["" if o.sandwich_holds is None else str(o.sandwich_holds).lower() for o in result.seeds],
            "assumption_violations": [";".join(o.assumption_violations) for o in result.seeds],
            "failure": [o.failure or "" for o in result.seeds],
        }
    )


def learner_trace_frame(trace: LearnerTrace, q_star: QTable) -> pd.DataFrame:
    """Una fila por instantanea: step,seed,linf_error,l2_error,q_0..q_{n-1}."""
    snapshots = trace.snapshots
    gap = snapshots - q_star.values[None, :]
    frame = pd.DataFrame(
        {
            "step": trace.snapshot_steps,
            "seed": np.full(snapshots.shape[0], trace.seed, dtype=np.int64),
            "linf_error": np.max(np.abs(gap), axis=1),
            "l2_error": np.linalg.norm(gap, axis=1),
        }
    )
    values = pd.DataFrame(snapshots, columns=[f"q_{i}" for i in range(snapshots.shape[1])])
    return pd.concat([frame, values], axis=1)


def coupled_trace_frame(trace: CoupledTrace) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "step": np.arange(trace.x_learner.shape[0]),
            "lower_min_slack": trace.lower_min_slack(),
            "upper_min_slack": trace.upper_min_slack(),
            "linf_learner_error": np.max(np.abs(trace.x_learner), axis=1),
            "linf_lower_error": np.max(np.abs(trace.x_lower), axis=1),
            "linf_upper_error": np.max(np.abs(trace.x_upper), axis=1),
        }
    )


def bound_frame(steps: np.ndarray, values: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"k": np.asarray(steps, dtype=np.int64), "bound": np.asarray(values, dtype=np.float64)})


class StorageService:
    """Fachada sencilla sobre el backend de almacenamiento."""

    def __init__(
        self,
        backend: StorageBackend | None = None,
        root: str | Path | None = None,
    ) -> None:
        if backend is not None:
            self._backend = backend
        else:
            self._backend = CsvStorageBackend(root or Path("results"))

    def save_sweep(self, result: SweepResult, name: str | None = None) -> Path:
        path = self._backend.write_table(sweep_frame(result), name or f"{result.label}_{result.operator}.csv")
        logger.info("%s filas de barrido guardadas en %s", len(result.points), path)
        return path

    def save_seeds(self, result: SweepResult, name: str | None = None) -> Path:
        path = self._backend.write_table(
            seeds_frame(result), name or f"{result.label}_{result.operator}_seeds.csv"
        )
        failed = result.failures()
        if failed:
            logger.warning("%s semillas fallidas registradas en %s", len(failed), path)
        return path

    def save_learner_trace(self, trace: LearnerTrace, q_star: QTable, name: str) -> Path:
        return self._backend.write_table(learner_trace_frame(trace, q_star), name)

    def save_coupled_trace(self, trace: CoupledTrace, name: str) -> Path:
        return self._backend.write_table(coupled_trace_frame(trace), name)

    def save_bound_curve(self, steps: np.ndarray, values: np.ndarray, name: str) -> Path:
        return self._backend.write_table(bound_frame(steps, values), name)

    def save_config(self, cfg: BaseModel, name: str = "config.json") -> Path:
        return self._backend.write_text(cfg.model_dump_json(indent=2), name)

    def save_report(self, report: Mapping[str, Any], name: str = "verify_report.json") -> Path:
        return self._backend.write_text(json.dumps(report, indent=2, sort_keys=False), name)

    def save_text(self, text: str, name: str) -> Path:
        return self._backend.write_text(text, name)

    def load_table(self, name: str) -> pd.DataFrame:
        return self._backend.read_table(name)


def emit_csv(result: SweepResult, path: str | Path) -> Path:
    """Tabla del barrido con 17 cifras significativas, ordenada por valor."""
    path = Path(path)
    return StorageService(root=path.parent).save_sweep(result, path.name)


__all__ = [
    "CsvStorageBackend",
    "FLOAT_FORMAT",
    "SWEEP_COLUMNS",
    "StorageBackend",
    "StorageService",
    "bound_frame",
    "coupled_trace_frame",
    "emit_csv",
    "learner_trace_frame",
    "seeds_frame",
    "sweep_frame",
]
