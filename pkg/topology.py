"""
Neighbor structures for the coupling term: periodic ring, global
(all-to-all) and small-world (4-neighbor ring with random rewiring).

Small-world lists are directed: site i owns its four slots and the
coupling only ever reads those.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from errors import DomainError, ShapeError, SizeError

logger = logging.getLogger(__name__)


class TopologyKind(str, Enum):
    RING = "ring"
    GLOBAL = "global"
    SMALL_WORLD = "small-world"


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    size: int
    # (size, degree) int array; None for global coupling
    neighbors: Optional[np.ndarray] = None
    rewire_p: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.neighbors is not None:
            self.neighbors.setflags(write=False)

    @property
    def degree(self) -> int:
        if self.kind == TopologyKind.GLOBAL:
            return self.size
        return int(self.neighbors.shape[1])


def build_ring(N: int) -> Topology:
    if N < 3:
        raise SizeError(f"ring needs N >= 3, got {N}")
    sites = np.arange(N)
    neighbors = np.stack([(sites - 1) % N, (sites + 1) % N], axis=1).astype(np.int64)
    return Topology(kind=TopologyKind.RING, size=N, neighbors=neighbors)


def build_global(N: int) -> Topology:
    if N < 2:
        raise SizeError(f"global coupling needs N >= 2, got {N}")
    return Topology(kind=TopologyKind.GLOBAL, size=N)


def _four_neighbor_ring(N: int) -> np.ndarray:
    sites = np.arange(N)
    return np.stack(
        [(sites - 2) % N, (sites - 1) % N, (sites + 1) % N, (sites + 2) % N],
        axis=1,
    ).astype(np.int64)


def build_small_world(N: int, p: float, seed: int) -> Topology:
    """
    Start from the 4-neighbor ring and, slot by slot, replace the neighbor with
    probability p by a uniformly drawn site. Draws equal to the site itself or
    to another entry of its list are rejected and redrawn.
    RNG: numpy PCG64 through default_rng(seed).
    """
    if N < 6:
        raise SizeError(f"small-world needs N >= 6, got {N}")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"rewiring probability must be in [0, 1], got {p}")

    rng = np.random.default_rng(seed)
    neighbors = _four_neighbor_ring(N)
    rewired = 0
    for i in range(N):
        row = neighbors[i]
        for k in range(4):
            if rng.random() >= p:
                continue
            others = set(int(v) for v in np.delete(row, k))
            while True:
                candidate = int(rng.integers(0, N))
                if candidate != i and candidate not in others:
                    break
            row[k] = candidate
            rewired += 1

    logger.debug(f"small-world N={N} p={p} seed={seed}: {rewired} of {4 * N} slots rewired")
    return Topology(
        kind=TopologyKind.SMALL_WORLD,
        size=N,
        neighbors=neighbors,
        rewire_p=float(p),
        seed=int(seed),
    )


def build_topology(kind: TopologyKind, N: int, p: float = 0.0, seed: int = 0) -> Topology:
    if kind == TopologyKind.RING:
        return build_ring(N)
    if kind == TopologyKind.GLOBAL:
        return build_global(N)
    return build_small_world(N, p, seed)


def _check_values(topology: Topology, values: np.ndarray):
    if np.shape(values) != (topology.size,):
        raise ShapeError(f"expected {topology.size} values, got shape {np.shape(values)}")


def neighbor_sum(topology: Topology, site: int, values: np.ndarray) -> float:
    _check_values(topology, values)
    if not (0 <= site < topology.size):
        raise IndexError(f"site {site} outside [0, {topology.size})")
    if topology.kind == TopologyKind.GLOBAL:
        return float(np.sum(values))
    total = 0.0
    for j in topology.neighbors[site]:
        total += values[j]
    return float(total)


def neighbor_sums(topology: Topology, values: np.ndarray) -> np.ndarray:
    """neighbor_sum for every site at once; slots are added left to right."""
    _check_values(topology, values)
    if topology.kind == TopologyKind.GLOBAL:
        return np.full(topology.size, np.sum(values))
    gathered = values[topology.neighbors]
    total = gathered[:, 0].copy()
    for k in range(1, gathered.shape[1]):
        total += gathered[:, k]
    return total
