"""
Validated configuration models for runs and experiments.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ValidationError, confloat, conint, root_validator, validator

from config import (
    DEFAULT_BLOWUP_BOUND,
    DEFAULT_ENSEMBLE_SIZE,
    DEFAULT_NU,
    DEFAULT_OUTPUT_DIR,
    SYNC_THRESHOLD,
)
from maps import BernoulliMapParams, GaussMapParams, OnSiteMap
from topology import TopologyKind


class InitKind(str, Enum):
    UNIFORM = "uniform"
    CONSTANT = "constant"


class MapKind(str, Enum):
    GAUSS = "gauss"
    BERNOULLI = "bernoulli"


class Mode(str, Enum):
    RUN = "run"
    SCAN = "scan"
    SYNC_SCALING = "sync-scaling"


# Keys a scan may not vary: they change the shape of the experiment, not a parameter
NON_SCANNABLE = {"topology", "init", "map", "classical", "heatmap"}


class RunConfig(BaseModel):
    alpha: confloat(gt=0, le=1)
    epsilon: confloat(ge=0, le=1)
    beta: float
    N: conint(ge=2)
    T: conint(ge=0)
    topology: TopologyKind
    nu: confloat(gt=0) = DEFAULT_NU
    p: confloat(ge=0, le=1) = 0.0
    topology_seed: int = 0
    init: InitKind = InitKind.UNIFORM
    init_low: float = 0.0
    init_high: float = 1.0
    init_value: float = 0.5
    init_seed: int = 0
    blowup_bound: confloat(gt=0) = DEFAULT_BLOWUP_BOUND
    map: MapKind = MapKind.GAUSS
    bernoulli_slope: confloat(gt=0) = 2.0
    classical: bool = False
    compensated: bool = False
    memory_window: Optional[conint(ge=1)] = None
    heatmap: bool = False
    heatmap_modulus: conint(ge=1) = 1
    heatmap_lo: Optional[float] = None
    heatmap_hi: Optional[float] = None
    record_site: conint(ge=0) = 0
    threshold: confloat(gt=0) = SYNC_THRESHOLD
    stop_on_sync: bool = False

    class Config:
        extra = "forbid"

    @root_validator(skip_on_failure=True)
    def check_consistency(cls, values):
        N = values["N"]
        kind = values["topology"]
        if kind == TopologyKind.RING and N < 3:
            raise ValueError(f"N must be >= 3 for ring topology, got {N}")
        if kind == TopologyKind.SMALL_WORLD and N < 6:
            raise ValueError(f"N must be >= 6 for small-world topology, got {N}")
        if values["init"] == InitKind.UNIFORM and not values["init_low"] < values["init_high"]:
            raise ValueError("init_low must be < init_high")
        lo, hi = values.get("heatmap_lo"), values.get("heatmap_hi")
        if (lo is None) != (hi is None):
            raise ValueError("heatmap_lo and heatmap_hi must be given together")
        if lo is not None and not lo < hi:
            raise ValueError("heatmap_lo must be < heatmap_hi")
        if values["record_site"] >= N:
            raise ValueError(f"record_site must be < N={N}")
        return values

    def on_site_map(self) -> OnSiteMap:
        if self.map == MapKind.BERNOULLI:
            return BernoulliMapParams(slope=self.bernoulli_slope)
        return GaussMapParams(nu=self.nu, beta=self.beta)

    def replace(self, **changes) -> "RunConfig":
        """Validated copy with some fields changed."""
        return RunConfig(**{**self.dict(), **changes})


class ExperimentSpec(BaseModel):
    mode: Mode = Mode.RUN
    base: RunConfig
    scan: Dict[str, List[str]] = {}
    ensemble: conint(ge=1) = DEFAULT_ENSEMBLE_SIZE
    sizes: List[conint(ge=2)] = []
    output_dir: str = DEFAULT_OUTPUT_DIR
    workers: conint(ge=1) = 1
    seed_stride: conint(ge=0) = 1
    reference: bool = False

    class Config:
        extra = "forbid"

    @validator("scan")
    def scan_axes_are_fields(cls, axes):
        for name, values in axes.items():
            if name not in RunConfig.__fields__:
                raise ValueError(f"scan axis '{name}' is not a config key")
            if name in NON_SCANNABLE:
                raise ValueError(f"scan axis '{name}' cannot be scanned")
            if not values:
                raise ValueError(f"scan axis '{name}' has no values")
        return axes

    @root_validator(skip_on_failure=True)
    def check_mode(cls, values):
        mode = values["mode"]
        if mode == Mode.SCAN and not values["scan"]:
            raise ValueError("scan mode needs at least one scan.<key> axis")
        if mode == Mode.SYNC_SCALING and len(values["sizes"]) < 3:
            raise ValueError("sync-scaling mode needs at least 3 sizes")
        return values

    @root_validator(skip_on_failure=True)
    def check_scan_values(cls, values):
        base = values["base"]
        problems = []
        for name, axis in values["scan"].items():
            for raw in axis:
                try:
                    base.replace(**{name: raw})
                except ValidationError as e:
                    for err in e.errors():
                        problems.append(f"scan.{name}={raw}: {err['msg']}")
        if problems:
            raise ValueError("; ".join(problems))
        return values
