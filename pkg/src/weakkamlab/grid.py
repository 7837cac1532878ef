"""Periodic grids on the 1- and 2-torus and the node-to-node hop graph.

Nodes sit at integer multiples of dx = 1/n per axis, all index arithmetic is
modulo n.  A control is an integer offset vector k with |k_j| <= m; one hop
moves a node by k (mod n) in exactly one time step dt, i.e. with velocity
v = k*dx/dt.  Every hop lands exactly on a grid node, so the Bellman operators
downstream are plain min-plus reductions and the measure optimizations are
exact finite LPs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid with n nodes per axis on T^dim."""

    dim: int
    n: int

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def node_count(self) -> int:
        return self.n ** self.dim

    def coords(self, nodes=None) -> np.ndarray:
        """Coordinates in [0,1)^dim; shape (k, dim)."""
        if nodes is None:
            nodes = np.arange(self.node_count)
        nodes = np.asarray(nodes, dtype=np.int64)
        if self.dim == 1:
            return (nodes[..., None] * self.dx).astype(float)
        i, j = np.divmod(nodes, self.n)
        return np.stack([i * self.dx, j * self.dx], axis=-1)

    def shift(self, nodes: np.ndarray, offset) -> np.ndarray:
        """Node indices after moving by an integer offset vector (mod n)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        if self.dim == 1:
            return (nodes + int(offset[0])) % self.n
        i, j = np.divmod(nodes, self.n)
        return ((i + int(offset[0])) % self.n) * self.n + (j + int(offset[1])) % self.n

    def index_of(self, multi) -> int:
        """Flat node index from per-axis integer indices."""
        multi = np.asarray(multi, dtype=np.int64) % self.n
        if self.dim == 1:
            return int(multi[0])
        return int(multi[0] * self.n + multi[1])

    def torus_distance(self, a: int, b: int) -> float:
        """Geodesic distance on the flat torus between two nodes."""
        ca, cb = self.coords(np.array([a, b]))
        d = np.abs(ca - cb)
        d = np.minimum(d, 1.0 - d)
        return float(np.sqrt(np.sum(d * d)))


@dataclass(frozen=True)
class ControlSet:
    """All integer hop offsets k with |k_j| <= m, with velocities k*dx/dt."""

    dt: float
    m: int
    offsets: np.ndarray = field(repr=False)   # (count, dim) ints
    velocities: np.ndarray = field(repr=False)  # (count, dim) floats

    @property
    def count(self) -> int:
        return self.offsets.shape[0]

    @property
    def rest_index(self) -> int:
        return int(np.where(np.all(self.offsets == 0, axis=1))[0][0])

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self.velocities)))


@dataclass(frozen=True)
class EdgeGraph:
    """Complete hop graph: edge e = (src, velocity index, tgt), tgt = src + k (mod n).

    Edges are indexed canonically by e = src*count + j where j is the velocity
    index; this ordering is relied upon by the measure CSV exports.
    """

    grid: TorusGrid
    controls: ControlSet
    src: np.ndarray = field(repr=False)
    vel: np.ndarray = field(repr=False)
    tgt: np.ndarray = field(repr=False)

    @property
    def edge_count(self) -> int:
        return self.src.shape[0]

    def edge_index(self, src: int, vel: int) -> int:
        return src * self.controls.count + vel


def make_grid(dim: int, n: int) -> TorusGrid:
    """Build a periodic grid with n >= 4 nodes per axis on T^1 or T^2."""
    if dim not in (1, 2):
        raise ConfigurationError(f"dim must be 1 or 2, got {dim}")
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise ConfigurationError(f"n must be an integer >= 4, got {n}")
    return TorusGrid(dim=int(dim), n=int(n))


def make_control_set(grid: TorusGrid, dt: float, m: int) -> ControlSet:
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if m < 1:
        raise ConfigurationError(f"control radius m must be >= 1, got {m}")
    if m >= grid.n / 2:
        raise ConfigurationError(
            f"control radius m={m} must satisfy m < n/2 = {grid.n / 2} (hops would wrap ambiguously)"
        )
    rng = range(-m, m + 1)
    offsets = np.array(list(itertools.product(rng, repeat=grid.dim)), dtype=np.int64)
    velocities = offsets * (grid.dx / dt)
    return ControlSet(dt=float(dt), m=int(m), offsets=offsets, velocities=velocities)


def build_edge_graph(grid: TorusGrid, dt: float, m: int) -> EdgeGraph:
    """Complete hop graph; each node gets (2m+1)^dim outgoing edges."""
    controls = make_control_set(grid, dt, m)
    nodes = np.arange(grid.node_count, dtype=np.int64)
    src = np.repeat(nodes, controls.count)
    vel = np.tile(np.arange(controls.count, dtype=np.int64), grid.node_count)
    tgt = np.empty_like(src)
    for j in range(controls.count):
        tgt[j::controls.count] = grid.shift(nodes, controls.offsets[j])
    return EdgeGraph(grid=grid, controls=controls, src=src, vel=vel, tgt=tgt)


def incoming_table(graph: EdgeGraph) -> tuple[np.ndarray, np.ndarray]:
    """(sources, edge ids) of the edge with velocity j arriving at node x.

    Returns two (count, N) arrays: in_src[j, x] is the source node of the
    unique edge with velocity index j and target x, in_edge[j, x] its canonical
    edge index.  This is the shift structure every backward operator uses.
    """
    grid, controls = graph.grid, graph.controls
    nodes = np.arange(grid.node_count, dtype=np.int64)
    in_src = np.empty((controls.count, grid.node_count), dtype=np.int64)
    for j in range(controls.count):
        in_src[j] = grid.shift(nodes, -controls.offsets[j])
    in_edge = in_src * controls.count + np.arange(controls.count, dtype=np.int64)[:, None]
    return in_src, in_edge
