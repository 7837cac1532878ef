"""Critical value (three routes), Peierls barrier, Aubry set and critical solutions.

The per-unit-time edge cost is L(src, v); a directed cycle's mean cost equals
its time average because every hop lasts dt.  The critical value c0 is minus
the minimum mean cycle, computed by Karp's recurrence, by the subsolution LP,
and by the discounted ergodic approximation, which must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InternalError
from .grid import EdgeGraph, TorusGrid, incoming_table
from .lp import LinearProgram, solve_lp


@dataclass
class GridField:
    """One real value per grid node."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.node_count,):
            raise ConfigurationError(
                f"field has {self.values.shape} values for {self.grid.node_count} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("field values must be finite")


@dataclass(frozen=True)
class CriticalData:
    c0: float
    method: str  # karp | lp | ergodic
    witness: object  # karp: cycle node list; lp: subsolution GridField


@dataclass(frozen=True)
class BarrierData:
    source: int
    h: GridField
    self_value: float
    burn_in: int
    horizon: int


def edge_costs(graph: EdgeGraph, model) -> np.ndarray:
    """Per-unit-time Lagrangian cost of every edge, canonical order."""
    return model.edge_lagrangian(graph)


def incoming_costs(graph: EdgeGraph, model, c0: float = 0.0):
    """(in_src, in_edge, in_cost) with in_cost[j, x] = dt*(L+c0) of the j-edge into x."""
    in_src, in_edge = incoming_table(graph)
    L = edge_costs(graph, model)
    in_cost = graph.controls.dt * (L[in_edge] + c0)
    return in_src, in_edge, in_cost


# ---------------------------------------------------------------------------
# critical value


def critical_value_karp(graph: EdgeGraph, model) -> CriticalData:
    """c0 = -(minimum mean cycle) by Karp's recurrence, with a witness cycle.

    Runs exactly N+1 rounds (levels 0..N for N nodes) from source node 0; the
    witness cycle is extracted from the parent chain of the level-N walk that
    attains the min-max ratio, and its mean is verified against the value.
    """
    grid = graph.grid
    N = grid.node_count
    in_src, in_edge = incoming_table(graph)
    w = edge_costs(graph, model)
    cost_in = w[in_edge]  # (V, N) per-unit-time costs

    d = np.full((N + 1, N), np.inf)
    parent = np.full((N + 1, N), -1, dtype=np.int64)
    d[0, 0] = 0.0
    for k in range(N):
        cand = d[k][in_src] + cost_in  # (V, N)
        j_best = np.argmin(cand, axis=0)
        d[k + 1] = cand[j_best, np.arange(N)]
        parent[k + 1] = in_src[j_best, np.arange(N)]

    finite = np.isfinite(d[:N])
    with np.errstate(invalid="ignore"):
        ratios = (d[N][None, :] - d[:N]) / (N - np.arange(N))[:, None]
    ratios[~finite] = -np.inf
    per_node = np.max(ratios, axis=0)
    mu_star = float(np.min(per_node))
    v_star = int(np.argmin(per_node))

    # walk the parent chain from level N; any cycle on it has mean mu_star
    walk = [v_star]
    node = v_star
    for k in range(N, 0, -1):
        node = int(parent[k, node])
        walk.append(node)
    walk.reverse()  # forward-time order, length N+1
    first_seen: dict[int, int] = {}
    cycle = None
    for i, x in enumerate(walk):
        if x in first_seen:
            cycle = walk[first_seen[x] : i]
            break
        first_seen[x] = i
    if cycle is None:
        raise InternalError("no repeated node on a length-N walk")

    mean = _cycle_mean(graph, w, cycle)
    if abs(mean - mu_star) > 1e-9 * (1.0 + abs(mu_star)):
        raise InternalError(f"witness cycle mean {mean} != Karp value {mu_star}")
    return CriticalData(c0=-mu_star, method="karp", witness=list(cycle))


def _cycle_mean(graph: EdgeGraph, w: np.ndarray, cycle) -> float:
    grid, V = graph.grid, graph.controls.count
    total = 0.0
    for i, x in enumerate(cycle):
        y = cycle[(i + 1) % len(cycle)]
        offs = _offset_between(grid, x, y, graph.controls.m)
        j = _offset_index(graph.controls, offs)
        total += w[x * V + j]
    return total / len(cycle)


def _offset_between(grid: TorusGrid, x: int, y: int, m: int):
    if grid.dim == 1:
        d = (y - x) % grid.n
        return (d if d <= m else d - grid.n,)
    xi, xj = divmod(x, grid.n)
    yi, yj = divmod(y, grid.n)
    out = []
    for a, b in ((xi, yi), (xj, yj)):
        d = (b - a) % grid.n
        out.append(d if d <= m else d - grid.n)
    return tuple(out)


def _offset_index(controls, offs) -> int:
    side = 2 * controls.m + 1
    j = 0
    for k in offs:
        if abs(k) > controls.m:
            raise InternalError(f"cycle hop {offs} exceeds control radius")
        j = j * side + (k + controls.m)
    return j


def critical_value_lp(graph: EdgeGraph, model) -> CriticalData:
    """Minimal c such that w(tgt) - w(src) <= dt*(L + c) has a solution w.

    Variables are the split node potentials w = w+ - w-, the split level
    c = c+ - c-, and one slack per edge; w(node 0) is pinned to 0 to remove
    the translation invariance.  Returns the witness subsolution.
    """
    grid = graph.grid
    N, E, dt = grid.node_count, graph.edge_count, graph.controls.dt
    L = edge_costs(graph, model)

    ncols = 2 * N + 2 + E
    A = np.zeros((E + 1, ncols))
    b = np.zeros(E + 1)
    rows = np.arange(E)
    # w(tgt) - w(src) - dt*c + s_e = dt*L_e
    A[rows, graph.tgt] += 1.0
    A[rows, N + graph.tgt] -= 1.0
    A[rows, graph.src] -= 1.0
    A[rows, N + graph.src] += 1.0
    A[rows, 2 * N] = -dt
    A[rows, 2 * N + 1] = dt
    A[rows, 2 * N + 2 + rows] = 1.0
    b[:E] = dt * L
    A[E, 0] = 1.0
    A[E, N] = -1.0  # pin w(0) = 0

    c_obj = np.zeros(ncols)
    c_obj[2 * N] = 1.0
    c_obj[2 * N + 1] = -1.0
    sol = solve_lp(LinearProgram(c=c_obj, A=A, b=b))
    if sol.status != "optimal":
        raise InternalError(f"critical LP ended with status {sol.status}")
    w_nodes = sol.x[:N] - sol.x[N : 2 * N]
    return CriticalData(c0=float(sol.value), method="lp", witness=GridField(grid, w_nodes))


def critical_value_ergodic(
    graph: EdgeGraph, model, lam: float, max_iters: int = 200, tol: float = 1e-10
) -> GridField:
    """Fixed point of u(x) = min over incoming (y,v) of (1-lam*dt)*u(y) + dt*L(y,v).

    Returns the field -lam*u.  Solved by policy iteration (each round evaluates
    the current predecessor policy exactly, then re-optimizes), which reaches
    the unique fixed point of this contraction in a handful of rounds; the
    stopping rule remains sup-change <= tol.
    """
    if lam <= 0:
        raise ConfigurationError("lam must be positive")
    dt = graph.controls.dt
    if lam * dt >= 1.0:
        raise ConfigurationError(f"lam*dt = {lam * dt} must stay below 1")
    gamma = 1.0 - lam * dt
    grid = graph.grid
    N = grid.node_count
    in_src, in_edge = incoming_table(graph)
    q = dt * edge_costs(graph, model)[in_edge]  # (V, N)

    u = np.zeros(N)
    policy = np.argmin(q, axis=0)
    eye = np.eye(N)
    for _ in range(max_iters):
        pred = in_src[policy, np.arange(N)]
        M = eye.copy()
        M[np.arange(N), pred] -= gamma
        u_new = np.linalg.solve(M, q[policy, np.arange(N)])
        cand = gamma * u_new[in_src] + q
        policy_new = np.argmin(cand, axis=0)
        change = float(np.max(np.abs(u_new - u)))
        u = u_new
        if np.array_equal(policy_new, policy) and change <= tol:
            break
        policy = policy_new
    return GridField(grid, -lam * u)


# ---------------------------------------------------------------------------
# Peierls barrier and Aubry set


def _barrier_matrix(graph: EdgeGraph, model, c0: float, sources, burn_in: int, horizon: int):
    N = graph.grid.node_count
    if not burn_in >= N:
        raise ConfigurationError(f"burn_in {burn_in} must be >= node count {N}")
    if not horizon > burn_in:
        raise ConfigurationError(f"horizon {horizon} must exceed burn_in {burn_in}")
    in_src, _, in_cost = incoming_costs(graph, model, c0)
    sources = np.asarray(sources, dtype=np.int64)
    H = np.full((len(sources), N), np.inf)
    H[np.arange(len(sources)), sources] = 0.0
    running = None
    for k in range(1, horizon + 1):
        H = np.min(H[:, in_src] + in_cost[None, :, :], axis=1)
        if k >= burn_in:
            running = H.copy() if running is None else np.minimum(running, H)
    return running


def peierls_barrier(
    graph: EdgeGraph, model, c0: float, source: int, burn_in: int | None = None, horizon: int | None = None
) -> BarrierData:
    """Windowed liminf of the minimal action h_k(source, .) with cost dt*(L+c0).

    h_k is the k-step min-plus power; the returned field is the running
    minimum over k in [burn_in, horizon] (defaults 4N and 8N), the discrete
    stand-in for the liminf.
    """
    N = graph.grid.node_count
    burn_in = 4 * N if burn_in is None else burn_in
    horizon = 8 * N if horizon is None else horizon
    row = _barrier_matrix(graph, model, c0, [source], burn_in, horizon)[0]
    field = GridField(graph.grid, row)
    return BarrierData(
        source=int(source),
        h=field,
        self_value=float(row[source]),
        burn_in=burn_in,
        horizon=horizon,
    )


def compute_all_barriers(
    graph: EdgeGraph, model, c0: float, burn_in: int | None = None, horizon: int | None = None
) -> list[BarrierData]:
    """BarrierData for every source, sharing one vectorized min-plus sweep."""
    N = graph.grid.node_count
    burn_in = 4 * N if burn_in is None else burn_in
    horizon = 8 * N if horizon is None else horizon
    H = _barrier_matrix(graph, model, c0, np.arange(N), burn_in, horizon)
    return [
        BarrierData(
            source=s,
            h=GridField(graph.grid, H[s]),
            self_value=float(H[s, s]),
            burn_in=burn_in,
            horizon=horizon,
        )
        for s in range(N)
    ]


def barrier_matrix(barriers) -> np.ndarray:
    """(N, N) array h[source, target] from per-source BarrierData."""
    order = sorted(barriers, key=lambda b: b.source)
    return np.stack([b.h.values for b in order])


def aubry_set(barriers, tol_A: float = 1e-6) -> np.ndarray:
    """Nodes y with h(y,y) <= tol_A; guaranteed nonempty on a valid graph."""
    nodes = np.array(sorted(b.source for b in barriers if b.self_value <= tol_A), dtype=np.int64)
    if nodes.size == 0:
        raise InternalError("empty Aubry set: no node carries a zero-cost cycle")
    return nodes


def backward_operator_undiscounted(graph: EdgeGraph, model, c0: float, u: np.ndarray) -> np.ndarray:
    """One min-plus Bellman step with cost dt*(L+c0)."""
    in_src, _, in_cost = incoming_costs(graph, model, c0)
    return np.min(u[in_src] + in_cost, axis=0)


def weak_kam_solution(barrier: BarrierData, graph: EdgeGraph, model, c0: float, tol_A: float = 1e-6) -> GridField:
    """h(y, .) for y in the Aubry set, the discrete critical solution from y."""
    if barrier.self_value > tol_A:
        raise ConfigurationError(
            f"source {barrier.source} is not in the Aubry set (h(y,y) = {barrier.self_value})"
        )
    return barrier.h


def fixed_point_residual(graph: EdgeGraph, model, c0: float, field: GridField) -> float:
    """Sup-norm distance of a field from one undiscounted backward step."""
    return float(np.max(np.abs(field.values - backward_operator_undiscounted(graph, model, c0, field.values))))


def subsolution_violation(graph: EdgeGraph, model, c0: float, values: np.ndarray) -> float:
    """max over edges of w(tgt) - w(src) - dt*(L+c0); <= 0 means subsolution."""
    L = edge_costs(graph, model)
    slack = values[graph.tgt] - values[graph.src] - graph.controls.dt * (L + c0)
    return float(np.max(slack))
