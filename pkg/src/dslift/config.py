"""
Configuration management for dslift.

Settings can be customized via environment variables before importing dslift.

Environment Variables
---------------------
DSLIFT_OUTDIR : str
    Default output directory of the command-line runner (default: ./dslift_output).
DSLIFT_LOG_LEVEL : str
    Logging level: DEBUG, INFO, WARNING, ERROR (default: WARNING).
DSLIFT_GRID_SIZE : int
    Points of the uniform evaluation grid on [0, pi] (default: 4096, minimum 16).
DSLIFT_TILE_SIZE : int
    Points per side of a kernel-assembly tile (default: 64).
DSLIFT_WORKERS : int
    Threads used for tile assembly (default: 1).
DSLIFT_SEED : int
    Seed of every random polynomial drawn by the experiments (default: 20240611).

Examples
--------
Configure via shell environment::

    export DSLIFT_OUTDIR=/tmp/dslift
    export DSLIFT_WORKERS=4
    dslift selftest

Or configure in Python and reload::

    import os
    os.environ["DSLIFT_GRID_SIZE"] = "2048"
    from dslift.config import Config
    Config.reload()
"""

from __future__ import annotations

import logging
import os
from pathlib import Path

__all__ = [
    "Config",
    "get_logger",
    "setup_logging",
]

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_env(name: str, default: int, minimum: int) -> int:
    raw = os.environ.get(name, str(default)).strip()
    return max(minimum, int(raw)) if raw.isdigit() else default


class Config:
    """
    Configuration settings for dslift.

    Environment-driven settings are validated on import (and on ``reload``);
    invalid values fall back to their defaults.

    Attributes:
        OUTDIR: Default directory for CSV/JSON artifacts.
        LOG_LEVEL: Logging verbosity.
        GRID_SIZE: Evaluation grid size for sup norms on [0, pi].
        TILE_SIZE: Tile edge for blocked kernel assembly.
        WORKERS: Thread count for tile assembly.
        SEED: Seed for random test polynomials.

    Numerical constants:
        MAX_DEGREE: Largest polynomial degree any basis may be built to.
        QL_TOLERANCE: Off-diagonal deflation threshold of the QL eigensolver.
        QL_MAX_SWEEPS: Sweep budget per eigenvalue.
        HEAT_TERM_THRESHOLD: Heat-series terms below this are dropped.
        HEAT_TAIL_WARNING: Tail bounds above this flag a truncation warning.
        SMOOTHNESS_FLOOR: Errors below this count as machine-flat.
        PROFILE_FLOOR: Localization values below this fraction of the
            on-diagonal value are treated as round-off.
        BALL_CAP_ORDER: Polar nodes and direction order of per-ball cap rules.
        CSTAR_STEP, CSTAR_MAX: Search grid of the polynomial-preservation constant.
        BAND_TOLERANCE: Connection entries below this count as zero.
    """

    OUTDIR: Path = Path(os.environ.get("DSLIFT_OUTDIR", "dslift_output"))

    _log_level_env = os.environ.get("DSLIFT_LOG_LEVEL", "WARNING").upper()
    LOG_LEVEL: str = _log_level_env if _log_level_env in _LOG_LEVELS else "WARNING"

    GRID_SIZE: int = _int_env("DSLIFT_GRID_SIZE", 4096, 16)
    TILE_SIZE: int = _int_env("DSLIFT_TILE_SIZE", 64, 1)
    WORKERS: int = _int_env("DSLIFT_WORKERS", 1, 1)
    SEED: int = _int_env("DSLIFT_SEED", 20240611, 0)

    # Polynomials and quadrature
    MAX_DEGREE: int = 8192
    QL_TOLERANCE: float = 1e-14
    QL_MAX_SWEEPS: int = 60

    # Kernels
    HEAT_TERM_THRESHOLD: float = 1e-18
    HEAT_TAIL_WARNING: float = 1e-8
    SMOOTHNESS_FLOOR: float = 1e-13
    PROFILE_FLOOR: float = 1e-12
    PROFILE_GRID_SIZE: int = 512
    ZONAL_PROFILE_POINTS: int = 2048
    ENVELOPE_FLOOR: float = 1e-13

    # Ball space
    BALL_MAX_Q: int = 8
    BALL_GRID: tuple[int, int] = (64, 64)
    BALL_MEASURE_ORDER: int = 32
    BALL_MAX_NODES: int = 200_000
    BALL_CAP_ORDER: int = 24

    # Joint spaces
    CSTAR_STEP: float = 0.05
    CSTAR_MAX: float = 16.0
    BAND_TOLERANCE: float = 1e-10

    # Artifacts
    CSV_FLOAT_FORMAT: str = "%.17g"

    @classmethod
    def reload(cls) -> None:
        """
        Reload configuration from environment variables.

        Example:
            >>> import os
            >>> os.environ["DSLIFT_WORKERS"] = "4"
            >>> Config.reload()
        """
        cls.OUTDIR = Path(os.environ.get("DSLIFT_OUTDIR", "dslift_output"))

        log_env = os.environ.get("DSLIFT_LOG_LEVEL", "WARNING").upper()
        cls.LOG_LEVEL = log_env if log_env in _LOG_LEVELS else "WARNING"

        cls.GRID_SIZE = _int_env("DSLIFT_GRID_SIZE", 4096, 16)
        cls.TILE_SIZE = _int_env("DSLIFT_TILE_SIZE", 64, 1)
        cls.WORKERS = _int_env("DSLIFT_WORKERS", 1, 1)
        cls.SEED = _int_env("DSLIFT_SEED", 20240611, 0)


def setup_logging(level: str | None = None) -> logging.Logger:
    """
    Set up logging for dslift.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR). If None, uses
            DSLIFT_LOG_LEVEL or WARNING.

    Returns:
        The root dslift logger.

    Example:
        >>> from dslift.config import setup_logging
        >>> logger = setup_logging("DEBUG")
    """
    if level is None:
        level = Config.LOG_LEVEL

    logger = logging.getLogger("dslift")
    logger.setLevel(getattr(logging, level.upper(), logging.WARNING))

    # Only add handler if none exist (avoid duplicates)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setLevel(logging.DEBUG)
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%H:%M:%S"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for a dslift submodule.

    Args:
        name: Module name (e.g., "orthopoly", "joint").

    Returns:
        Logger instance for the module.
    """
    return logging.getLogger(f"dslift.{name}")
