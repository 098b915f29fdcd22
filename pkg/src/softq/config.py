"""Configuracion general de la aplicacion."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

try:  # pragma: no cover - configuracion opcional
    from dotenv import load_dotenv
except ImportError:  # pragma: no cover
    load_dotenv = None

if load_dotenv is not None:
    load_dotenv()


def _get_env(name: str, default: str) -> str:
    value = os.getenv(name)
    return value if value else default


def _optional_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    return int(value) if value else None


@dataclass(slots=True)
class Settings:
    """Configuracion basica leida de variables de entorno.

    seed es None si SOFTQ_SEED no esta definida; en ese caso manda la
    semilla del archivo de configuracion.
    """

    seed: Optional[int] = field(default_factory=lambda: _optional_int("SOFTQ_SEED"))
    output_dir: str = field(default_factory=lambda: _get_env("SOFTQ_OUTPUT_DIR", "results"))
    workers: int = field(default_factory=lambda: int(_get_env("SOFTQ_WORKERS", "1")))
    log_level: str = field(default_factory=lambda: _get_env("SOFTQ_LOG_LEVEL", "INFO").upper())
    strict: bool = field(default_factory=lambda: _get_env("SOFTQ_STRICT", "true").lower() == "true")

    @property
    def base_seed(self) -> int:
        return self.seed if self.seed is not None else 0


settings = Settings()
