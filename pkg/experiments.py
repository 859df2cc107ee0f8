"""
Experiment orchestration: single runs, parameter scans and ensemble
synchronization-time studies. Every output lands in the experiment's
output_dir.
"""

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from analysis import (
    ObservableSeries,
    PowerLawFit,
    SyncTimeResult,
    default_period_window,
    detect_period,
    fit_sigma_decay,
    fit_sync_scaling,
    summarize_sync_times,
    sync_time_from_spread,
)
from config_handler import save_config, spec_to_values
from engine import run, run_truncated
from errors import InsufficientDataError
from exporters import (
    build_heatmap_grid,
    export_adjacency,
    export_heatmap,
    export_series,
    export_site_series,
    export_table,
    output_path,
)
from models import ExperimentSpec, RunConfig
from topology import TopologyKind, build_small_world
from utils import ensure_directories, log_event, new_run_id

logger = logging.getLogger(__name__)

# Longest period looked for in a recorded site trajectory
SITE_MAX_PERIOD = 12

SCALING_COLUMNS = ("N", "mean_T_N", "stderr", "count", "censored")
MEMBER_COLUMNS = ("N", "member", "init_seed", "topology_seed", "T_N")


@dataclass
class RunOutcome:
    config: RunConfig
    series: ObservableSeries
    sync: SyncTimeResult
    period: Optional[int]
    decay: Optional[PowerLawFit]
    stats: Dict[str, Any] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return self.series.diverged


@dataclass
class ScalingResult:
    rows: List[Dict[str, Any]]
    fit: Optional[PowerLawFit]
    members: List[Dict[str, Any]]
    files: Dict[str, str] = field(default_factory=dict)


def _map(fn: Callable, items: List[Any], workers: int) -> List[Any]:
    """Order-preserving map; results only depend on each item's own seeds."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def site_period(series: ObservableSeries) -> Optional[int]:
    if series.site_series is None or len(series.site_series) < 3:
        return None
    window = default_period_window(len(series.site_series))
    max_period = min(SITE_MAX_PERIOD, window - 1)
    if max_period < 1:
        return None
    return detect_period(series.site_series, max_period, window=window)


def _decay_fit(series: ObservableSeries) -> Optional[PowerLawFit]:
    if series.diverged or len(series) < 2:
        return None
    try:
        return fit_sigma_decay(series)
    except InsufficientDataError as e:
        logger.info(f"no decay fit: {e}")
        return None


def analyse(config: RunConfig, series: ObservableSeries) -> RunOutcome:
    sync = sync_time_from_spread(series.spread, config.threshold, series.times)
    period = site_period(series)
    decay = _decay_fit(series)
    stats: Dict[str, Any] = {
        "final_t": int(series.times[-1]),
        "final_mean": float(series.mean_field[-1]),
        "final_std": float(series.spatial_std[-1]),
        "final_spread": float(series.spread[-1]),
        "T_N": sync.T_N,
        "site_period": period,
        "decay_exponent": decay.exponent if decay else None,
        "decay_amplitude": decay.amplitude if decay else None,
        "decay_t_lo": decay.t_lo if decay else None,
        "decay_t_hi": decay.t_hi if decay else None,
        "decay_residual": decay.residual if decay else None,
        "decay_period": decay.period if decay else None,
    }
    return RunOutcome(config=config, series=series, sync=sync, period=period, decay=decay, stats=stats)


def execute(config: RunConfig, reference: bool = False, run_id: Optional[str] = None) -> ObservableSeries:
    if config.memory_window is not None and reference:
        _, series, _ = run_truncated(config, config.memory_window, reference=True, run_id=run_id)
        return series
    _, series = run(config, run_id=run_id)
    return series


def _write_run_outputs(outcome: RunOutcome, directory: str, spec_values: Dict[str, str]) -> Dict[str, str]:
    config = outcome.config
    series = outcome.series
    ensure_directories(directory)
    files = {
        "series": output_path(directory, "series.csv"),
        "site_series": output_path(directory, "site_series.csv"),
        "summary": output_path(directory, "summary.txt"),
        "config": output_path(directory, "config.cfg"),
    }
    save_config(spec_values, files["config"], header="config that reproduces this run")
    export_series(series, files["series"])
    export_site_series(series, files["site_series"])

    heatmap_flat = None
    if config.heatmap:
        value_range = None
        if config.heatmap_lo is not None:
            value_range = (config.heatmap_lo, config.heatmap_hi)
        grid = build_heatmap_grid(series, value_range=value_range)
        if grid.values.size:
            files["heatmap"] = output_path(directory, "heatmap.pgm")
            heatmap_flat = export_heatmap(grid, files["heatmap"])

    if config.topology == TopologyKind.SMALL_WORLD:
        # rebuilt from its seed, identical to the run's adjacency
        files["adjacency"] = output_path(directory, "adjacency.csv")
        export_adjacency(build_small_world(config.N, config.p, config.topology_seed), files["adjacency"])

    summary: Dict[str, Any] = dict(spec_values)
    meta = series.metadata
    for key in ("run_id", "scheme", "steps_completed", "diverged", "diverged_site", "diverged_time",
                "kernel_prefactor", "kernel_underflow", "max_deviation"):
        if key in meta:
            summary[key] = meta[key]
    summary.update(outcome.stats)
    summary["heatmap_flat"] = heatmap_flat
    save_config(summary, files["summary"], header="run summary (key = value); every config key and seed is listed")
    return files


def run_single(spec: ExperimentSpec) -> RunOutcome:
    config = spec.base
    series = execute(config, reference=spec.reference)
    outcome = analyse(config, series)
    outcome.files = _write_run_outputs(outcome, spec.output_dir, spec_to_values(spec))
    log_event("EXPERIMENT", f"run written to {spec.output_dir}", run=series.metadata.get("run_id"))
    return outcome


def expand_scan(spec: ExperimentSpec) -> List[Tuple[Dict[str, str], RunConfig]]:
    """Cartesian product of the scan axes applied to the base config."""
    names = list(spec.scan.keys())
    points = []
    for combo in itertools.product(*(spec.scan[name] for name in names)):
        assignment = dict(zip(names, combo))
        points.append((assignment, spec.base.replace(**assignment)))
    return points


def _scan_point(args: Tuple[int, Dict[str, str], RunConfig, str, bool, Dict[str, str]]) -> Dict[str, Any]:
    index, assignment, config, directory, reference, spec_values = args
    series = execute(config, reference=reference)
    outcome = analyse(config, series)
    values = {k: v for k, v in spec_values.items() if not k.startswith("scan.")}
    values.update({"mode": "run", "output_dir": directory, **assignment})
    _write_run_outputs(outcome, directory, values)
    row: Dict[str, Any] = {"point": index, **assignment}
    row.update(
        {
            "final_std": outcome.stats["final_std"],
            "final_spread": outcome.stats["final_spread"],
            "T_N": outcome.sync.T_N,
            "site_period": outcome.period,
            "decay_exponent": outcome.stats["decay_exponent"],
            "diverged": series.diverged,
            "directory": directory,
        }
    )
    return row


def run_scan(spec: ExperimentSpec) -> List[Dict[str, Any]]:
    points = expand_scan(spec)
    ensure_directories(spec.output_dir)
    spec_values = spec_to_values(spec)
    jobs = [
        (i, assignment, config, os.path.join(spec.output_dir, f"point_{i:03d}"), spec.reference, spec_values)
        for i, (assignment, config) in enumerate(points)
    ]
    log_event("EXPERIMENT", f"scan over {list(spec.scan)} with {len(jobs)} points")
    rows = _map(_scan_point, jobs, spec.workers)

    columns = ["point", *spec.scan.keys(), "final_std", "final_spread", "T_N", "site_period",
               "decay_exponent", "diverged", "directory"]
    export_table(rows, columns, output_path(spec.output_dir, "scan.csv"))
    summary = dict(spec_values)
    summary["points"] = len(rows)
    summary["diverged_points"] = sum(1 for r in rows if r["diverged"])
    save_config(summary, output_path(spec.output_dir, "summary.txt"), header="scan summary")
    return rows


def member_config(base: RunConfig, N: int, member: int, stride: int) -> RunConfig:
    return base.replace(
        N=N,
        init_seed=base.init_seed + member * stride,
        topology_seed=base.topology_seed + member * stride,
        stop_on_sync=True,
        heatmap=False,
        record_site=0,
    )


def member_sync_time(config: RunConfig) -> Optional[int]:
    _, series = run(config)
    if series.diverged:
        return None
    return sync_time_from_spread(series.spread, config.threshold, series.times).T_N


def run_sync_scaling(
    spec: ExperimentSpec,
    runner: Optional[Callable[[RunConfig], Optional[int]]] = None,
) -> ScalingResult:
    """
    For each N, run the ensemble (seeds base + member * seed_stride), average
    T_N over the members that synchronized within T and fit T_N ~ N^z.
    Members that never synchronize are counted as censored and left out.
    """
    runner = runner or member_sync_time
    threshold = spec.base.threshold
    ensure_directories(spec.output_dir)
    run_id = new_run_id()

    rows: List[Dict[str, Any]] = []
    members: List[Dict[str, Any]] = []
    for N in spec.sizes:
        configs = [member_config(spec.base, N, m, spec.seed_stride) for m in range(spec.ensemble)]
        times = _map(runner, configs, spec.workers)
        results = [
            SyncTimeResult(T_N=tn, threshold=threshold, mean=float(tn), count=1) if tn is not None
            else SyncTimeResult(T_N=None, threshold=threshold, censored=1)
            for tn in times
        ]
        summary = summarize_sync_times(results, threshold)
        if summary.censored:
            log_event("SCALING", f"N={N}: {summary.censored} censored members excluded", run=run_id)
        rows.append(
            {
                "N": N,
                "mean_T_N": summary.mean,
                "stderr": summary.stderr,
                "count": summary.count,
                "censored": summary.censored,
            }
        )
        for m, (config, tn) in enumerate(zip(configs, times)):
            members.append(
                {"N": N, "member": m, "init_seed": config.init_seed,
                 "topology_seed": config.topology_seed, "T_N": tn}
            )

    usable = [r for r in rows if r["count"] > 0 and r["mean_T_N"] and r["mean_T_N"] > 0]
    fit = None
    if len(usable) >= 3:
        fit = fit_sync_scaling([r["N"] for r in usable], [r["mean_T_N"] for r in usable])
    else:
        logger.warning(f"only {len(usable)} sizes synchronized; no scaling fit")

    files = {
        "scaling": output_path(spec.output_dir, "scaling.csv"),
        "members": output_path(spec.output_dir, "members.csv"),
        "summary": output_path(spec.output_dir, "summary.txt"),
    }
    export_table(rows, SCALING_COLUMNS, files["scaling"])
    export_table(members, MEMBER_COLUMNS, files["members"])
    summary_values: Dict[str, Any] = dict(spec_to_values(spec))
    summary_values.update(
        {
            "run_id": run_id,
            "exponent": fit.exponent if fit else None,
            "amplitude": fit.amplitude if fit else None,
            "residual": fit.residual if fit else None,
            "censored_total": sum(r["censored"] for r in rows),
        }
    )
    save_config(summary_values, files["summary"], header="sync-scaling summary")
    log_event("SCALING", f"sizes={list(spec.sizes)} exponent={fit.exponent if fit else None}", run=run_id)
    return ScalingResult(rows=rows, fit=fit, members=members, files=files)
