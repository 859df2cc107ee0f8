"""
Experiment configuration in the flat `key = value` format.

One key per line, `#` starts a comment. Run keys go to RunConfig, `scan.<key>`
lines define scan axes (comma lists or inclusive `start:stop:step` ranges),
everything else belongs to the experiment. CLI overrides win over file values.
"""

import os
import math
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from errors import ConfigError, ExportError
from models import ExperimentSpec, RunConfig

SCAN_PREFIX = "scan."
LIST_KEYS = {"sizes"}
NULL_WORDS = {"", "none", "null"}

# Documented defaults of every optional key (required run keys have none)
DEFAULT_CONFIG: Dict[str, Any] = {
    **{
        name: field.default
        for name, field in RunConfig.__fields__.items()
        if not field.required
    },
    **{
        name: field.default
        for name, field in ExperimentSpec.__fields__.items()
        if name not in ("base", "scan")
    },
}

REQUIRED_KEYS = [name for name, field in RunConfig.__fields__.items() if field.required]


def get_config_path(filename: str) -> str:
    return os.path.abspath(filename)


def config_exists(filename: str) -> bool:
    return os.path.exists(get_config_path(filename))


def parse_text(text: str) -> Dict[str, str]:
    """Raw `key = value` pairs; malformed lines are collected and reported together."""
    values: Dict[str, str] = {}
    problems: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got '{line}'")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            problems.append(f"line {lineno}: empty key")
            continue
        if key in values:
            problems.append(f"line {lineno}: duplicate key '{key}'")
        values[key] = value
    if problems:
        raise ConfigError(problems)
    return values


def _is_int(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


def expand_axis(text: str) -> List[str]:
    """`a, b, c` or an inclusive range `start:stop:step`."""
    text = text.strip()
    if ":" not in text:
        return [item.strip() for item in text.split(",") if item.strip()]
    parts = [part.strip() for part in text.split(":")]
    if len(parts) != 3:
        raise ValueError(f"range '{text}' must be start:stop:step")
    if all(_is_int(part) for part in parts):
        start, stop, step = (int(part) for part in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"range '{text}' is empty")
        return [str(v) for v in range(start, stop + 1, step)]
    start, stop, step = (float(part) for part in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"range '{text}' is empty")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [repr(round(start + k * step, 12)) for k in range(count)]


def _format_errors(error: ValidationError) -> List[str]:
    messages = []
    for err in error.errors():
        loc = [str(part) for part in err["loc"] if part not in ("base", "__root__")]
        where = ".".join(loc)
        if err["type"] == "value_error.extra":
            messages.append(f"unknown key '{where}'")
        elif where:
            messages.append(f"{where}: {err['msg']}")
        else:
            messages.append(err["msg"])
    return messages


def build_spec(values: Dict[str, str]) -> ExperimentSpec:
    """Route flat keys into an ExperimentSpec, reporting every violation at once."""
    run: Dict[str, Any] = {}
    experiment: Dict[str, Any] = {}
    scan: Dict[str, List[str]] = {}
    problems: List[str] = []

    for key, value in values.items():
        if key.startswith(SCAN_PREFIX):
            try:
                scan[key[len(SCAN_PREFIX):]] = expand_axis(value)
            except ValueError as e:
                problems.append(f"{key}: {e}")
            continue
        parsed: Any = None if value.lower() in NULL_WORDS else value
        if key in LIST_KEYS and parsed is not None:
            parsed = [item.strip() for item in value.split(",") if item.strip()]
        if key in RunConfig.__fields__:
            if parsed is not None:
                run[key] = parsed
        elif key in ("base", "scan"):
            problems.append(f"unknown key '{key}'")
        elif parsed is not None:
            experiment[key] = parsed
        elif key not in ExperimentSpec.__fields__:
            problems.append(f"unknown key '{key}'")

    try:
        spec = ExperimentSpec(base=run, scan=scan, **experiment)
    except ValidationError as e:
        problems.extend(_format_errors(e))
        spec = None
    if problems:
        raise ConfigError(problems)
    return spec


def update_config(values: Dict[str, str], overrides: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    """Merge overrides over file values (overrides win)."""
    merged = dict(values)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = str(value)
    return merged


def parse_config(text: str, overrides: Optional[Dict[str, str]] = None) -> ExperimentSpec:
    return build_spec(update_config(parse_text(text), overrides))


def load_config(filename: str, overrides: Optional[Dict[str, str]] = None) -> ExperimentSpec:
    """Carga la configuración desde un archivo key = value"""
    config_path = get_config_path(filename)
    if not config_exists(filename):
        raise ExportError(config_path, "config file not found")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ExportError(config_path, str(e))
    return parse_config(text, overrides)


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # repr round-trips doubles exactly
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def spec_to_values(spec: ExperimentSpec) -> Dict[str, str]:
    """Every key needed to rebuild the experiment, as flat strings."""
    values = {key: format_value(value) for key, value in spec.base.dict().items()}
    for key, value in spec.dict().items():
        if key in ("base", "scan"):
            continue
        values[key] = format_value(value)
    for axis, items in spec.scan.items():
        values[f"{SCAN_PREFIX}{axis}"] = ", ".join(items)
    return values


def save_config(values: Dict[str, Any], filename: str, header: Optional[str] = None) -> Dict[str, str]:
    """Write a flat key = value file (summaries and reproducible configs)."""
    flat = {key: format_value(value) for key, value in values.items()}
    config_path = get_config_path(filename)
    try:
        os.makedirs(os.path.dirname(config_path), exist_ok=True)
        with open(config_path, "w", encoding="utf-8") as f:
            if header:
                for line in header.splitlines():
                    f.write(f"# {line}\n")
            for key, value in flat.items():
                f.write(f"{key} = {value}\n")
    except OSError as e:
        raise ExportError(config_path, str(e))
    return flat
