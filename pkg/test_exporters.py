#!/usr/bin/env python3
"""
Tests for PGM heat maps and CSV writers
"""

import numpy as np
import pytest

from analysis import ObservableSeries
from engine import run
from errors import DomainError, ExportError
from exporters import (
    HeatMapGrid,
    build_heatmap_grid,
    export_adjacency,
    export_heatmap,
    export_kernel,
    export_series,
    export_site_series,
    export_table,
    heatmap_pixels,
    read_series,
)
from kernel import build_kernel
from models import RunConfig
from topology import build_global, build_small_world


def grid(values, lo, hi, modulus=1):
    values = np.asarray(values, dtype=np.float64)
    rows = np.arange(values.shape[0]) * modulus
    return HeatMapGrid(rows=rows, cols=np.arange(values.shape[1]), values=values, lo=lo, hi=hi, modulus=modulus)


def small_run(**overrides):
    values = dict(alpha=0.6, epsilon=0.3, beta=-0.5, N=8, T=10, topology="ring", init_seed=2)
    values.update(overrides)
    return run(RunConfig(**values))


def test_pixel_extremes():
    assert heatmap_pixels(grid([[0.2]], 0.2, 1.0))[0].tolist() == [[0]]
    assert heatmap_pixels(grid([[1.0]], 0.2, 1.0))[0].tolist() == [[255]]
    assert heatmap_pixels(grid([[5.0, -5.0]], 0.0, 1.0))[0].tolist() == [[255, 0]]


def test_two_by_two_file(tmp_path):
    path = tmp_path / "grid.pgm"
    flat = export_heatmap(grid([[0.0, 1.0], [0.5, 0.25]], 0.0, 1.0), str(path))
    assert not flat
    assert path.read_bytes() == b"P5\n2 2\n255\n" + bytes([0, 255, 127, 63])


def test_flat_grid_is_mid_gray(tmp_path):
    path = tmp_path / "flat.pgm"
    flat = export_heatmap(grid([[0.3, 0.3, 0.3]], 0.3, 0.3), str(path))
    assert flat
    assert path.read_bytes().endswith(bytes([127, 127, 127]))


def test_empty_grid_is_rejected(tmp_path):
    with pytest.raises(DomainError):
        export_heatmap(grid(np.empty((0, 4)), 0.0, 1.0), str(tmp_path / "empty.pgm"))


def test_grid_rows_follow_modulus():
    with pytest.raises(DomainError):
        HeatMapGrid(rows=np.array([0, 2]), cols=np.arange(2), values=np.zeros((2, 2)), lo=0.0, hi=1.0, modulus=3)
    with pytest.raises(DomainError):
        HeatMapGrid(rows=np.array([0]), cols=np.arange(2), values=np.zeros((2, 2)), lo=0.0, hi=1.0)


def test_heatmap_from_run(tmp_path):
    _, series = small_run(heatmap=True, heatmap_modulus=3)
    heat = build_heatmap_grid(series)
    # floor(T / k) + 1 rows
    assert heat.rows.tolist() == [0, 3, 6, 9]
    assert heat.values.shape == (4, 8)

    coarse = build_heatmap_grid(series, modulus=6)
    assert coarse.rows.tolist() == [0, 6]
    with pytest.raises(DomainError):
        build_heatmap_grid(series, modulus=4)

    path = tmp_path / "run.pgm"
    export_heatmap(heat, str(path))
    data = path.read_bytes()
    assert data.startswith(b"P5\n8 4\n255\n")
    assert len(data) == len(b"P5\n8 4\n255\n") + 32


def test_heatmap_needs_recorded_rows():
    _, series = small_run(heatmap=False)
    with pytest.raises(DomainError):
        build_heatmap_grid(series)


def test_identical_runs_give_identical_heatmaps(tmp_path):
    paths = []
    for name in ("a.pgm", "b.pgm"):
        _, series = small_run(heatmap=True, T=30)
        paths.append(tmp_path / name)
        export_heatmap(build_heatmap_grid(series), str(paths[-1]))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_series_csv(tmp_path):
    _, series = small_run(T=3)
    path = tmp_path / "series.csv"
    export_series(series, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,mean,std"
    assert len(lines) == 5

    loaded = read_series(str(path))
    assert loaded["t"].tolist() == [0, 1, 2, 3]
    assert np.array_equal(loaded["mean"], series.mean_field)
    assert np.array_equal(loaded["std"], series.spatial_std)


def test_empty_series_csv(tmp_path):
    empty = ObservableSeries(times=np.array([], dtype=np.int64), mean_field=np.array([]),
                             spatial_std=np.array([]), spread=np.array([]))
    path = tmp_path / "empty.csv"
    export_series(empty, str(path))
    assert path.read_text() == "t,mean,std\n"


def test_site_series_csv(tmp_path):
    _, series = small_run(T=4, record_site=5)
    path = tmp_path / "site.csv"
    export_site_series(series, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x"
    assert len(lines) == 6
    assert float(lines[-1].split(",")[1]) == series.site_series[-1]


def test_kernel_csv(tmp_path):
    path = tmp_path / "kernel.csv"
    table = build_kernel(0.5, 4)
    export_kernel(table, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "m,g_alpha"
    m, weight = lines[1].split(",")
    assert m == "0"
    assert float(weight) == table.weights[0]
    assert len(lines) == 6


def test_adjacency_csv(tmp_path):
    path = tmp_path / "adjacency.csv"
    topo = build_small_world(10, 0.5, seed=1)
    export_adjacency(topo, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "site,slot,neighbor"
    assert len(lines) == 41
    assert lines[1] == f"0,1,{topo.neighbors[0][0]}"
    with pytest.raises(DomainError):
        export_adjacency(build_global(10), str(path))


def test_table_csv(tmp_path):
    path = tmp_path / "table.csv"
    export_table([{"N": 25, "mean_T_N": 12.5, "stderr": None}], ("N", "mean_T_N", "stderr"), str(path))
    assert path.read_text() == "N,mean_T_N,stderr\n25,12.5,\n"


def test_unwritable_path(tmp_path):
    target = tmp_path / "missing" / "series.csv"
    _, series = small_run(T=2)
    with pytest.raises(ExportError) as excinfo:
        export_series(series, str(target))
    assert excinfo.value.path == str(target)
    assert excinfo.value.exit_code == 3


if __name__ == "__main__":
    test_pixel_extremes()
    print("exporter tests passed")
