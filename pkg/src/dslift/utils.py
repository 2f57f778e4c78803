"""
Shared utilities for dslift.

Blocked assembly of pairwise matrices, least-squares slope fits and
artifact writing, used by the kernel, joint and experiment modules.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
import pandas as pd

from .config import Config, get_logger

logger = get_logger("utils")

__all__ = [
    "SlopeFit",
    "iter_tiles",
    "assemble_tiles",
    "min_distance",
    "fit_slope",
    "write_artifacts",
    "to_builtin",
]


def iter_tiles(rows: int, cols: int, tile: int | None = None) -> Iterator[tuple[slice, slice]]:
    """
    Yield (row_slice, col_slice) pairs covering a rows x cols matrix.

    Tiles are produced in row-major index order.
    """
    tile = tile or Config.TILE_SIZE
    for r0 in range(0, rows, tile):
        for c0 in range(0, cols, tile):
            yield slice(r0, min(r0 + tile, rows)), slice(c0, min(c0 + tile, cols))


def assemble_tiles(
    shape: tuple[int, int],
    block: Callable[[slice, slice], np.ndarray],
    tile: int | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """
    Assemble a dense matrix tile by tile.

    Each tile is computed independently by ``block`` and written to its own
    index range, so the result does not depend on how tiles are spread over
    threads.

    Args:
        shape: Output shape.
        block: Callable returning the values of one (row_slice, col_slice) tile.
        tile: Tile edge; defaults to Config.TILE_SIZE.
        workers: Thread count; defaults to Config.WORKERS.

    Returns:
        The assembled matrix.

    Example:
        >>> m = assemble_tiles((3, 5), lambda r, c: np.ones((r.stop - r.start, c.stop - c.start)))
        >>> float(m.sum())
        15.0
    """
    workers = workers or Config.WORKERS
    out = np.empty(shape, dtype=float)
    tiles = list(iter_tiles(shape[0], shape[1], tile))

    def fill(rc: tuple[slice, slice]) -> None:
        r, c = rc
        out[r, c] = block(r, c)

    if workers > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, tiles))
    else:
        for rc in tiles:
            fill(rc)
    return out


def min_distance(
    metric: Callable[[np.ndarray, np.ndarray], np.ndarray],
    points: np.ndarray,
    others: np.ndarray,
    tile: int | None = None,
) -> np.ndarray:
    """
    Distance from each of ``points`` to the nearest of ``others``.

    An empty ``others`` gives +inf everywhere (infimum over the empty set).
    """
    n = len(points)
    if len(others) == 0:
        return np.full(n, np.inf)
    tile = tile or Config.TILE_SIZE
    out = np.empty(n)
    for r0 in range(0, n, tile):
        chunk = points[r0:r0 + tile]
        d = metric(chunk[:, None], others[None, :])
        out[r0:r0 + len(chunk)] = d.min(axis=1)
    return out


class SlopeFit:
    """Least-squares line y = slope * x + intercept with its RMS residual."""

    __slots__ = ("slope", "intercept", "residual", "points")

    def __init__(self, slope: float, intercept: float, residual: float, points: int):
        self.slope = slope
        self.intercept = intercept
        self.residual = residual
        self.points = points

    def __repr__(self) -> str:
        return f"SlopeFit(slope={self.slope:.4f}, residual={self.residual:.3e}, points={self.points})"


def fit_slope(x: np.ndarray, y: np.ndarray) -> SlopeFit:
    """
    Fit a straight line through (x, y) by least squares.

    Returns a fit with NaN slope when fewer than two points are given.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return SlopeFit(math.nan, math.nan, math.nan, len(x))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return SlopeFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), len(x))


def to_builtin(value: object) -> object:
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    return value


def write_artifacts(
    outdir: Path | str,
    name: str,
    table: pd.DataFrame,
    summary: dict,
) -> tuple[Path, Path]:
    """
    Write ``<outdir>/<name>.csv`` and ``<outdir>/<name>.json``.

    The CSV carries a header row and 17 significant digits; the JSON summary
    is a flat object with sorted keys.

    Args:
        outdir: Output directory (created if missing).
        name: Artifact base name (the subcommand).
        table: Tabular result.
        summary: Flat mapping of scalars and short lists.

    Returns:
        Paths of the CSV and JSON files.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{name}.csv"
    json_path = outdir / f"{name}.json"

    table.to_csv(csv_path, index=False, float_format=Config.CSV_FLOAT_FORMAT, lineterminator="\n")
    flat = {str(k): to_builtin(v) for k, v in summary.items()}
    json_path.write_text(json.dumps(flat, indent=2, sort_keys=True) + "\n")

    logger.info(f"Wrote {len(table)} rows to {csv_path}")
    return csv_path, json_path
