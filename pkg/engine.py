"""
Coupled fractional map engine.

    x(i,t) = x(i,0) + (1/Gamma(alpha)) * sum_{j=1..t} g_alpha(t-j) * D(i,j-1)

where D(i,j-1) = F_i(x(., j-1)) - x(i,j-1) is the increment produced by the
coupled map F (ring, global or small-world coupling). Increments are stored
per site and never rewritten; every step re-sums the whole history in
ascending j, which is what makes the result independent of threading.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numba import njit, prange
from pydantic import BaseModel, confloat

from analysis import ObservableSeries, spatial_std
from errors import DomainError
from kernel import KernelTable, build_kernel
from maps import OnSiteMap
from models import InitKind, RunConfig
from topology import Topology, TopologyKind, build_topology, neighbor_sums
from utils import log_event, new_run_id

logger = logging.getLogger(__name__)


class CouplingScheme(str, Enum):
    RING_G1 = "ring-g1"
    GLOBAL_G2 = "global-g2"
    SMALL_WORLD_G3 = "small-world-g3"
    CLASSICAL = "classical"


_SCHEME_FOR_KIND = {
    TopologyKind.RING: CouplingScheme.RING_G1,
    TopologyKind.GLOBAL: CouplingScheme.GLOBAL_G2,
    TopologyKind.SMALL_WORLD: CouplingScheme.SMALL_WORLD_G3,
}


class CouplingParams(BaseModel):
    epsilon: confloat(ge=0, le=1)
    scheme: CouplingScheme

    class Config:
        allow_mutation = False


def scheme_for(kind: TopologyKind) -> CouplingScheme:
    return _SCHEME_FOR_KIND[TopologyKind(kind)]


# Scalar forms of the three coupling functions

def coupling_increment_g1(a: float, b: float, c: float, params: CouplingParams, on_site: OnSiteMap) -> float:
    eps = params.epsilon
    return (1.0 - eps) * on_site.evaluate(a) + (eps / 2.0) * (on_site.evaluate(b) + on_site.evaluate(c)) - a


def coupling_increment_g2(a: float, mapped_sum: float, N: int, params: CouplingParams, on_site: OnSiteMap) -> float:
    if N <= 0:
        raise DomainError(f"N must be > 0, got {N}")
    eps = params.epsilon
    return (1.0 - eps) * on_site.evaluate(a) + (eps / N) * mapped_sum - a


def coupling_increment_g3(a: float, neighbor_mapped_sum: float, params: CouplingParams, on_site: OnSiteMap) -> float:
    eps = params.epsilon
    return (1.0 - eps) * on_site.evaluate(a) + (eps / 4.0) * neighbor_mapped_sum - a


def _coupled_image(mapped: np.ndarray, topology: Topology, epsilon: float) -> np.ndarray:
    """(1 - eps) f(x_i) + (eps / degree) * sum of f over the neighbors of i."""
    if topology.kind == TopologyKind.GLOBAL:
        coupling = (epsilon / topology.size) * np.sum(mapped)
    else:
        coupling = (epsilon / topology.degree) * neighbor_sums(topology, mapped)
    return (1.0 - epsilon) * mapped + coupling


def direct_step(field: np.ndarray, topology: Topology, coupling: CouplingParams, on_site: OnSiteMap) -> np.ndarray:
    """Memoryless (integer-order) coupled map on any topology."""
    return _coupled_image(on_site.evaluate(field), topology, coupling.epsilon)


def classical_cml_step(field: np.ndarray, topology: Topology, epsilon: float, on_site: OnSiteMap) -> np.ndarray:
    """x'(i) = (1-eps) f(x(i)) + (eps/2) (f(x(i+1)) + f(x(i-1))), periodic."""
    if topology.kind != TopologyKind.RING:
        raise DomainError(f"classical CML step needs a ring, got {topology.kind.value}")
    return _coupled_image(on_site.evaluate(field), topology, epsilon)


@njit(parallel=True, cache=True)
def _memory_sum(history, weights, s, first, compensated, out):
    # out[i] = sum_{j=first..s} weights[s-j] * history[i, j-1], j ascending
    n = history.shape[0]
    for i in prange(n):
        acc = 0.0
        carry = 0.0
        for j in range(first, s + 1):
            term = weights[s - j] * history[i, j - 1]
            if compensated:
                y = term - carry
                total = acc + y
                carry = (total - acc) - y
                acc = total
            else:
                acc += term
        out[i] = acc
    return out


@dataclass
class SimulationState:
    t: int
    x0: np.ndarray
    # (N, capacity); column j holds D(., j), filled for j < t
    history: np.ndarray
    current: np.ndarray
    blowup_bound: float
    diverged: bool = False
    diverged_site: Optional[int] = None
    diverged_time: Optional[int] = None

    @property
    def size(self) -> int:
        return int(self.x0.size)

    @property
    def increments(self) -> np.ndarray:
        return self.history[:, : self.t]


def new_state(x0: np.ndarray, capacity: int, blowup_bound: float) -> SimulationState:
    x0 = np.array(x0, dtype=np.float64)
    x0.setflags(write=False)
    return SimulationState(
        t=0,
        x0=x0,
        history=np.zeros((x0.size, capacity), dtype=np.float64),
        current=x0.copy(),
        blowup_bound=float(blowup_bound),
    )


def _check_divergence(state: SimulationState):
    bad = ~np.isfinite(state.current) | (np.abs(state.current) > state.blowup_bound)
    if np.any(bad):
        state.diverged = True
        state.diverged_site = int(np.flatnonzero(bad)[0])
        state.diverged_time = state.t
        logger.warning(f"run diverged at site {state.diverged_site}, t={state.t}")


def step(
    state: SimulationState,
    kernel: KernelTable,
    topology: Topology,
    coupling: CouplingParams,
    on_site: OnSiteMap,
    memory_window: Optional[int] = None,
    compensated: bool = False,
) -> SimulationState:
    """
    Append the increment column for time state.t and advance to t + 1.
    With memory_window M only the last M increments enter the sum.
    """
    if state.diverged:
        raise DomainError(f"state diverged at t={state.diverged_time}; cannot step further")
    if coupling.scheme == CouplingScheme.CLASSICAL:
        raise DomainError("classical scheme has no memory; use direct_step")
    if coupling.scheme != scheme_for(topology.kind):
        raise DomainError(f"scheme {coupling.scheme.value} does not match {topology.kind.value} topology")
    s = state.t + 1
    if s > kernel.horizon or state.t >= state.history.shape[1]:
        raise DomainError(f"step {s} beyond horizon (kernel {kernel.horizon}, history {state.history.shape[1]})")

    image = _coupled_image(on_site.evaluate(state.current), topology, coupling.epsilon)
    state.history[:, state.t] = image - state.current

    first = 1 if memory_window is None else max(1, s - memory_window + 1)
    acc = _memory_sum(state.history, kernel.weights, s, first, compensated, np.empty(state.size))
    state.current = state.x0 + kernel.prefactor * acc
    state.t = s
    _check_divergence(state)
    return state


def initial_conditions(config: RunConfig) -> np.ndarray:
    if config.init == InitKind.CONSTANT:
        return np.full(config.N, float(config.init_value))
    rng = np.random.default_rng(config.init_seed)
    return rng.uniform(config.init_low, config.init_high, config.N)


class SeriesRecorder:
    """Collects per-step observables, the recorded site and heat-map rows."""

    def __init__(self, config: RunConfig):
        self.size = config.N
        self.record_site = config.record_site
        self.heatmap = config.heatmap
        self.modulus = config.heatmap_modulus
        self.times: List[int] = []
        self.means: List[float] = []
        self.stds: List[float] = []
        self.spreads: List[float] = []
        self.site: List[float] = []
        self.rows: List[np.ndarray] = []
        self.row_times: List[int] = []

    def record(self, t: int, field: np.ndarray):
        self.times.append(t)
        self.means.append(float(np.mean(field)))
        self.stds.append(spatial_std(field))
        self.spreads.append(float(np.max(field) - np.min(field)))
        self.site.append(float(field[self.record_site]))
        if self.heatmap and t % self.modulus == 0:
            self.rows.append(np.array(field, dtype=np.float64))
            self.row_times.append(t)

    @property
    def last_spread(self) -> float:
        return self.spreads[-1]

    def finish(self, diverged: bool, metadata: Dict[str, Any]) -> ObservableSeries:
        snapshots = None
        snapshot_times = None
        if self.heatmap:
            snapshots = np.vstack(self.rows) if self.rows else np.empty((0, self.size))
            snapshot_times = np.array(self.row_times, dtype=np.int64)
        return ObservableSeries(
            times=np.array(self.times, dtype=np.int64),
            mean_field=np.array(self.means),
            spatial_std=np.array(self.stds),
            spread=np.array(self.spreads),
            diverged=diverged,
            metadata=metadata,
            site_series=np.array(self.site),
            snapshots=snapshots,
            snapshot_times=snapshot_times,
        )


class Simulation:
    """One engine instance: owns its state and is driven by run / run_truncated."""

    def __init__(self, config: RunConfig, memory_window: Optional[int] = None, run_id: Optional[str] = None):
        self.config = config
        self.run_id = run_id or new_run_id()
        self.memory_window = memory_window
        self.kernel = build_kernel(config.alpha, config.T)
        self.topology = build_topology(config.topology, config.N, config.p, config.topology_seed)
        self.on_site = config.on_site_map()
        scheme = CouplingScheme.CLASSICAL if config.classical else scheme_for(config.topology)
        self.coupling = CouplingParams(epsilon=config.epsilon, scheme=scheme)
        capacity = 0 if config.classical else config.T
        self.state = new_state(initial_conditions(config), capacity, config.blowup_bound)
        self.recorder = SeriesRecorder(config)
        self.recorder.record(0, self.state.current)

    @property
    def synchronized(self) -> bool:
        return self.recorder.last_spread < self.config.threshold

    @property
    def finished(self) -> bool:
        if self.state.diverged or self.state.t >= self.config.T:
            return True
        return self.config.stop_on_sync and self.synchronized

    def advance(self):
        if self.coupling.scheme == CouplingScheme.CLASSICAL:
            self.state.current = direct_step(self.state.current, self.topology, self.coupling, self.on_site)
            self.state.t += 1
            _check_divergence(self.state)
        else:
            step(
                self.state,
                self.kernel,
                self.topology,
                self.coupling,
                self.on_site,
                memory_window=self.memory_window,
                compensated=self.config.compensated,
            )
        if not self.state.diverged:
            self.recorder.record(self.state.t, self.state.current)

    def metadata(self) -> Dict[str, Any]:
        meta: Dict[str, Any] = {
            key: (value.value if isinstance(value, Enum) else value)
            for key, value in self.config.dict().items()
        }
        meta.update(
            {
                "run_id": self.run_id,
                "scheme": self.coupling.scheme.value,
                "steps_completed": self.state.t,
                "diverged": self.state.diverged,
                "diverged_site": self.state.diverged_site,
                "diverged_time": self.state.diverged_time,
                "kernel_prefactor": self.kernel.prefactor,
                "kernel_underflow": self.kernel.underflow,
                "memory_window": self.memory_window,
            }
        )
        return meta

    def result(self) -> ObservableSeries:
        return self.recorder.finish(self.state.diverged, self.metadata())


def _describe(config: RunConfig) -> str:
    return (
        f"alpha={config.alpha} eps={config.epsilon} beta={config.beta} N={config.N} T={config.T} "
        f"topology={config.topology.value} init_seed={config.init_seed} topology_seed={config.topology_seed}"
    )


def run(config: RunConfig, run_id: Optional[str] = None) -> Tuple[SimulationState, ObservableSeries]:
    """Execute up to T steps (or stop on divergence / sync), recording every step."""
    sim = Simulation(config, memory_window=config.memory_window, run_id=run_id)
    log_event("RUN", f"start {_describe(config)}", run=sim.run_id)
    started = time.perf_counter()
    progress_every = max(1, config.T // 10)
    while not sim.finished:
        sim.advance()
        if sim.state.t % progress_every == 0:
            logger.debug(f"t={sim.state.t}/{config.T} std={sim.recorder.stds[-1]:.3e}")
    elapsed = time.perf_counter() - started
    series = sim.result()
    log_event(
        "RUN",
        f"done t={sim.state.t} diverged={sim.state.diverged} std={series.spatial_std[-1]:.3e} in {elapsed:.2f}s",
        run=sim.run_id,
    )
    return sim.state, series


def run_truncated(
    config: RunConfig,
    memory_window: int,
    reference: bool = False,
    run_id: Optional[str] = None,
) -> Tuple[SimulationState, ObservableSeries, Optional[float]]:
    """
    Run with only the last memory_window increments in the sum. With
    reference=True a full-memory engine is stepped alongside and the largest
    absolute difference over all sites and times is returned.
    """
    if memory_window < 1:
        raise DomainError(f"memory window must be >= 1, got {memory_window}")
    sim = Simulation(config, memory_window=memory_window, run_id=run_id)
    full = Simulation(config, memory_window=None, run_id=sim.run_id) if reference else None
    max_deviation = 0.0 if reference else None
    log_event("RUN", f"start truncated M={memory_window} {_describe(config)}", run=sim.run_id)

    while not sim.finished:
        sim.advance()
        if full is not None and not full.finished:
            full.advance()
            if not (sim.state.diverged or full.state.diverged):
                deviation = float(np.max(np.abs(sim.state.current - full.state.current)))
                max_deviation = max(max_deviation, deviation)

    series = sim.result()
    series.metadata["max_deviation"] = max_deviation
    log_event("RUN", f"done truncated t={sim.state.t} max_deviation={max_deviation}", run=sim.run_id)
    return sim.state, series, max_deviation
