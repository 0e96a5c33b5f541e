"""
Settings Module
Reads runtime defaults from the environment (and an optional .env file).

Every variable is optional:
- MCDOUGALL_LOG_LEVEL: logging level name (default: INFO)
- MCDOUGALL_BACKEND: exact | gaussian | bigfloat | interval (default: bigfloat)
- MCDOUGALL_PRECISION: working precision in bits (default: 128)
- MCDOUGALL_SCHEDULE: comma-separated escalation precisions (default: 64..4096)
- MCDOUGALL_SWEEP_WORKERS: worker processes for sweeps (default: 1)

Invalid values are logged and replaced by the default.
"""

import logging
import os
from dataclasses import dataclass
from typing import Tuple

from .arithmetic import (
    BACKENDS,
    DEFAULT_SCHEDULE,
    MAX_PRECISION_BITS,
    MIN_PRECISION_BITS,
)

# Try to load .env file if python-dotenv is available
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

logger = logging.getLogger(__name__)

ENV_PREFIX = "MCDOUGALL_"


@dataclass(frozen=True)
class Settings:
    """
    Runtime defaults. CLI flags take precedence over these values.

    Attributes:
        log_level: Logging level name
        backend: Default arithmetic backend
        precision_bits: Default working precision
        escalation_schedule: Precisions tried by --escalate
        sweep_workers: Process count for sweeps (1 = in-process)
    """
    log_level: str = "INFO"
    backend: str = "bigfloat"
    precision_bits: int = 128
    escalation_schedule: Tuple[int, ...] = DEFAULT_SCHEDULE
    sweep_workers: int = 1


def _env(name: str) -> str:
    return os.environ.get(ENV_PREFIX + name, "").strip()


def _parse_precision(raw: str, default: int) -> int:
    try:
        bits = int(raw)
    except ValueError:
        logger.warning(f"Invalid precision '{raw}', using default {default}")
        return default
    if not MIN_PRECISION_BITS <= bits <= MAX_PRECISION_BITS:
        logger.warning(
            f"Precision {bits} outside [{MIN_PRECISION_BITS}, {MAX_PRECISION_BITS}], "
            f"using default {default}"
        )
        return default
    return bits


def _parse_schedule(raw: str) -> Tuple[int, ...]:
    try:
        schedule = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        logger.warning(f"Invalid schedule '{raw}', using default")
        return DEFAULT_SCHEDULE
    ordered = all(a < b for a, b in zip(schedule, schedule[1:]))
    in_range = all(MIN_PRECISION_BITS <= p <= MAX_PRECISION_BITS for p in schedule)
    if not schedule or not ordered or not in_range:
        logger.warning(f"Schedule '{raw}' must be strictly increasing within bounds, using default")
        return DEFAULT_SCHEDULE
    return schedule


def get_settings() -> Settings:
    """
    Build Settings from MCDOUGALL_* environment variables.

    Returns:
        Settings with defaults substituted for missing or invalid values
    """
    defaults = Settings()

    log_level = _env("LOG_LEVEL").upper() or defaults.log_level
    if not isinstance(logging.getLevelName(log_level), int):
        logger.warning(f"Unknown log level '{log_level}', using {defaults.log_level}")
        log_level = defaults.log_level

    backend = _env("BACKEND").lower() or defaults.backend
    if backend not in BACKENDS:
        logger.warning(f"Unknown backend '{backend}', using {defaults.backend}")
        backend = defaults.backend

    raw_precision = _env("PRECISION")
    precision = _parse_precision(raw_precision, defaults.precision_bits) if raw_precision else defaults.precision_bits

    raw_schedule = _env("SCHEDULE")
    schedule = _parse_schedule(raw_schedule) if raw_schedule else defaults.escalation_schedule

    workers = defaults.sweep_workers
    raw_workers = _env("SWEEP_WORKERS")
    if raw_workers:
        try:
            workers = max(1, int(raw_workers))
        except ValueError:
            logger.warning(f"Invalid worker count '{raw_workers}', using {workers}")

    return Settings(
        log_level=log_level,
        backend=backend,
        precision_bits=precision,
        escalation_schedule=schedule,
        sweep_workers=workers,
    )
