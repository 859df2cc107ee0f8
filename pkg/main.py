"""
Command line entry point.

    python main.py run --config app_data/config/global_decay.cfg --alpha 0.6
    python main.py scan --config app_data/config/ring_period3.cfg --scan epsilon=0.02:0.2:0.02
    python main.py sync-scaling --config app_data/config/sync_scaling.cfg
    python main.py kernel --alpha 0.6 --horizon 10000 --output kernel.csv
    python main.py serve --port 8000

Exit codes: 0 success, 2 config error, 3 I/O error, 4 divergence, 1 other.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

import config_handler
from errors import DivergenceError, ExportError, FracmapError
from experiments import run_scan, run_single, run_sync_scaling
from exporters import export_kernel
from kernel import build_kernel
from models import ExperimentSpec, Mode, RunConfig
from utils import log_event, setup_logging

logger = logging.getLogger(__name__)

EXPERIMENT_KEYS = [name for name in ExperimentSpec.__fields__ if name not in ("base", "scan", "mode")]


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value experiment file")
    group = parser.add_argument_group("config keys (override the file)")
    for name in list(RunConfig.__fields__) + EXPERIMENT_KEYS:
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, metavar="VALUE", default=None)
    group.add_argument(
        "--scan",
        dest="scan_axes",
        action="append",
        default=[],
        metavar="KEY=VALUES",
        help="scan axis, e.g. epsilon=0.1:0.9:0.1 or beta=-0.4,-0.5",
    )
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracmap",
        description="Coupled fractional Gauss maps on ring, global and small-world lattices",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in Mode:
        _add_config_flags(sub.add_parser(mode.value, help=f"{mode.value} experiment"))

    kernel = sub.add_parser("kernel", help="dump the memory kernel table as CSV")
    kernel.add_argument("--alpha", type=float, required=True)
    kernel.add_argument("--horizon", type=int, required=True)
    kernel.add_argument("--output", default="kernel.csv")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, str]:
    overrides = {
        name: getattr(args, name)
        for name in list(RunConfig.__fields__) + EXPERIMENT_KEYS
        if getattr(args, name, None) is not None
    }
    for axis in args.scan_axes:
        if "=" not in axis:
            raise FracmapError(f"--scan expects KEY=VALUES, got '{axis}'")
        key, values = axis.split("=", 1)
        overrides[f"{config_handler.SCAN_PREFIX}{key.strip()}"] = values
    overrides["mode"] = args.command
    return overrides


def load_spec(args: argparse.Namespace) -> ExperimentSpec:
    overrides = collect_overrides(args)
    if args.config:
        return config_handler.load_config(args.config, overrides)
    return config_handler.parse_config("", overrides)


def _run_experiment(args: argparse.Namespace) -> int:
    spec = load_spec(args)
    if spec.mode == Mode.RUN:
        outcome = run_single(spec)
        print(f"series written to {outcome.files['series']}")
        if outcome.diverged:
            meta = outcome.series.metadata
            raise DivergenceError(meta.get("diverged_site"), meta.get("diverged_time"))
        if outcome.decay:
            print(f"sigma decay exponent {outcome.decay.exponent:.4f} (period {outcome.decay.period})")
        if outcome.sync.reached:
            print(f"synchronized at t={outcome.sync.T_N}")
    elif spec.mode == Mode.SCAN:
        rows = run_scan(spec)
        print(f"{len(rows)} scan points written to {spec.output_dir}")
    else:
        result = run_sync_scaling(spec)
        for row in result.rows:
            print(f"N={row['N']}: mean T_N={row['mean_T_N']} stderr={row['stderr']} "
                  f"count={row['count']} censored={row['censored']}")
        if result.fit:
            print(f"T_N ~ N^{result.fit.exponent:.3f}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(console=True, level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO)

    try:
        if args.command == "kernel":
            table = build_kernel(args.alpha, args.horizon)
            export_kernel(table, args.output)
            print(f"kernel alpha={args.alpha} horizon={args.horizon} written to {args.output}")
            return 0
        if args.command == "serve":
            import uvicorn

            uvicorn.run("server:app", host=args.host, port=args.port)
            return 0
        return _run_experiment(args)
    except FracmapError as e:
        log_event("ERROR", f"{type(e).__name__}: {e}")
        violations = getattr(e, "violations", None)
        if violations:
            print("error: invalid configuration", file=sys.stderr)
            for violation in violations:
                print(f"  - {violation}", file=sys.stderr)
        else:
            print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        log_event("ERROR", f"I/O failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return ExportError.exit_code


if __name__ == "__main__":
    sys.exit(main())
