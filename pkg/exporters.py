"""
Output writers: binary 8-bit graymaps for heat maps and CSV files for
series, kernel tables, adjacency lists and experiment tables.
"""

import csv
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis import ObservableSeries
from errors import DomainError, ExportError
from kernel import KernelTable
from topology import Topology, TopologyKind

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
MID_GRAY = 127


@dataclass
class HeatMapGrid:
    rows: np.ndarray  # recorded times, all multiples of modulus
    cols: np.ndarray  # site indices
    values: np.ndarray  # (len(rows), len(cols))
    lo: float
    hi: float
    modulus: int = 1

    def __post_init__(self):
        if self.values.shape != (len(self.rows), len(self.cols)):
            raise DomainError(f"grid values {self.values.shape} do not match {len(self.rows)}x{len(self.cols)}")
        if np.any(np.asarray(self.rows) % self.modulus != 0):
            raise DomainError(f"every heat-map row must satisfy t mod {self.modulus} = 0")


def build_heatmap_grid(
    series: ObservableSeries,
    modulus: Optional[int] = None,
    value_range: Optional[Tuple[float, float]] = None,
) -> HeatMapGrid:
    """
    Heat map from the snapshots a run kept. modulus defaults to the run's own;
    a larger one must be a multiple of it. The range defaults to the global
    min / max of the kept rows.
    """
    if series.snapshots is None:
        raise DomainError("run did not record heat-map rows (heatmap = false)")
    recorded_k = int(series.metadata.get("heatmap_modulus", 1))
    k = recorded_k if modulus is None else int(modulus)
    if k < 1 or k % recorded_k != 0:
        raise DomainError(f"modulus {k} is not a multiple of the recorded modulus {recorded_k}")

    keep = series.snapshot_times % k == 0
    values = series.snapshots[keep]
    if value_range is None:
        finite = values[np.isfinite(values)]
        lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 0.0)
    else:
        lo, hi = float(value_range[0]), float(value_range[1])
    return HeatMapGrid(
        rows=series.snapshot_times[keep],
        cols=np.arange(values.shape[1]),
        values=values,
        lo=lo,
        hi=hi,
        modulus=k,
    )


def heatmap_pixels(grid: HeatMapGrid) -> Tuple[np.ndarray, bool]:
    """floor(255 * (x - lo) / (hi - lo)) clamped to [0, 255]; mid-gray if hi == lo."""
    if grid.hi == grid.lo:
        return np.full(grid.values.shape, MID_GRAY, dtype=np.uint8), True
    scaled = np.floor(255.0 * (grid.values - grid.lo) / (grid.hi - grid.lo))
    scaled = np.nan_to_num(scaled, nan=0.0, posinf=255.0, neginf=0.0)
    return np.clip(scaled, 0, 255).astype(np.uint8), False


def export_heatmap(grid: HeatMapGrid, path: str) -> bool:
    """Write a binary PGM (P5, maxval 255). Returns True when the grid was flat."""
    if grid.values.size == 0:
        raise DomainError("cannot export an empty heat map")
    pixels, flat = heatmap_pixels(grid)
    if flat:
        logger.warning(f"heat map {path} has hi == lo = {grid.hi}; written as mid-gray")
    height, width = pixels.shape
    try:
        with open(path, "wb") as f:
            f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            f.write(np.ascontiguousarray(pixels).tobytes())
    except OSError as e:
        raise ExportError(path, str(e))
    return flat


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
    except OSError as e:
        raise ExportError(path, str(e))


def _fmt(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def export_series(series: ObservableSeries, path: str) -> None:
    rows = (
        (int(t), _fmt(m), _fmt(s))
        for t, m, s in zip(series.times, series.mean_field, series.spatial_std)
    )
    _write_csv(path, ("t", "mean", "std"), rows)


def read_series(path: str) -> Dict[str, np.ndarray]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise ExportError(path, str(e))
    return {
        "t": np.array([int(r["t"]) for r in rows], dtype=np.int64),
        "mean": np.array([float(r["mean"]) for r in rows]),
        "std": np.array([float(r["std"]) for r in rows]),
    }


def export_site_series(series: ObservableSeries, path: str) -> None:
    """Trajectory of the recorded site (t, x)."""
    values = series.site_series if series.site_series is not None else []
    _write_csv(path, ("t", "x"), ((int(t), _fmt(x)) for t, x in zip(series.times, values)))


def export_kernel(table: KernelTable, path: str) -> None:
    _write_csv(path, ("m", "g_alpha"), ((m, _fmt(w)) for m, w in enumerate(table.weights)))


def export_adjacency(topology: Topology, path: str) -> None:
    """Edge list (site, slot, neighbor) with slots numbered from 1."""
    if topology.kind == TopologyKind.GLOBAL:
        raise DomainError("global coupling has no explicit neighbor lists")
    rows = (
        (site, slot + 1, int(neighbor))
        for site, neighbors in enumerate(topology.neighbors)
        for slot, neighbor in enumerate(neighbors)
    )
    _write_csv(path, ("site", "slot", "neighbor"), rows)


def export_table(rows: List[Dict[str, Any]], columns: Sequence[str], path: str) -> None:
    def cell(value):
        if value is None:
            return ""
        if isinstance(value, (float, np.floating)):
            return _fmt(value)
        return value

    _write_csv(path, columns, ([cell(row.get(c)) for c in columns] for row in rows))


def output_path(directory: str, name: str) -> str:
    return os.path.join(directory, name)
