"""
HTTP API over the simulation library
Kernel tables, config validation and small single runs
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, conint

import config_handler
from config import SERVER_MAX_WORK
from errors import ConfigError, DomainError
from experiments import analyse
from engine import run
from kernel import build_kernel, kernel_asymptotic_ratio
from models import RunConfig
from utils import log_event, setup_logging

setup_logging()

# Request models
class KernelRequest(BaseModel):
    alpha: float
    horizon: conint(ge=0)
    head: conint(ge=0) = 10

class ValidateRequest(BaseModel):
    text: str

class KernelResponse(BaseModel):
    alpha: float
    horizon: int
    prefactor: float
    weights: List[float]
    underflow: bool
    asymptotic_ratio: Optional[float]

class RunResponse(BaseModel):
    run_id: str
    steps_completed: int
    diverged: bool
    diverged_site: Optional[int]
    diverged_time: Optional[int]
    final_mean: float
    final_std: float
    final_spread: float
    T_N: Optional[int]
    site_period: Optional[int]
    decay_exponent: Optional[float]

# Create FastAPI app
app = FastAPI(title="Coupled Fractional Maps API", version="1.0.0")

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Root endpoint
@app.get("/")
def root():
    return {"message": "Coupled Fractional Maps API is running", "version": "1.0.0"}

# Health check
@app.get("/health")
def health_check():
    return {"status": "healthy", "timestamp": datetime.now().isoformat()}

@app.post("/kernel", response_model=KernelResponse)
def kernel_endpoint(request: KernelRequest):
    """Memory kernel prefactor and leading weights"""
    try:
        table = build_kernel(request.alpha, request.horizon)
        ratio = kernel_asymptotic_ratio(table, table.horizon) if table.horizon >= 1 else None
        return KernelResponse(
            alpha=table.alpha,
            horizon=table.horizon,
            prefactor=table.prefactor,
            weights=[float(w) for w in table.weights[: request.head]],
            underflow=table.underflow,
            asymptotic_ratio=ratio,
        )
    except DomainError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error building kernel: {str(e)}")

@app.post("/config/validate")
def validate_config(request: ValidateRequest):
    """Validate a flat key = value experiment file, returning every violation"""
    try:
        spec = config_handler.parse_config(request.text)
        return {"valid": True, "violations": [], "config": config_handler.spec_to_values(spec)}
    except ConfigError as e:
        return {"valid": False, "violations": e.violations}
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error validating config: {str(e)}")

@app.post("/run", response_model=RunResponse)
def run_endpoint(config: RunConfig):
    """Run a small simulation synchronously"""
    work = float(config.N) * float(config.T) ** 2
    if work > SERVER_MAX_WORK:
        raise HTTPException(
            status_code=400,
            detail=f"N*T^2 = {work:.3g} exceeds the server limit {SERVER_MAX_WORK:.3g}; use the CLI",
        )
    try:
        _, series = run(config)
        outcome = analyse(config, series)
        meta: Dict[str, Any] = series.metadata
        log_event("API", f"run N={config.N} T={config.T} diverged={series.diverged}", run=meta["run_id"])
        return RunResponse(
            run_id=meta["run_id"],
            steps_completed=meta["steps_completed"],
            diverged=series.diverged,
            diverged_site=meta["diverged_site"],
            diverged_time=meta["diverged_time"],
            final_mean=outcome.stats["final_mean"],
            final_std=outcome.stats["final_std"],
            final_spread=outcome.stats["final_spread"],
            T_N=outcome.sync.T_N,
            site_period=outcome.period,
            decay_exponent=outcome.stats["decay_exponent"],
        )
    except HTTPException:
        raise
    except DomainError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Run error: {str(e)}")
