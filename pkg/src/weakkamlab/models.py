"""Hamiltonian / Lagrangian / contact-model catalogue and the numeric Legendre transform.

Position and velocity arguments follow one convention everywhere: for dim=1
they are scalars or shape-(k,) arrays, for dim=2 a single (2,) point or a
(k, 2) batch.  Built-in models carry analytic Lagrangians; table models hold
node-sampled values and evaluate only on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, RangeExhaustedError
from .grid import EdgeGraph, TorusGrid


def _axes(z, dim: int) -> tuple:
    """Split a point/batch argument into per-axis arrays (broadcast-friendly)."""
    z = np.asarray(z, dtype=float)
    if dim == 1:
        return (z,)
    if z.ndim == 1:
        return (z[0], z[1])
    return (z[..., 0], z[..., 1])


def _sqnorm(z, dim: int):
    ax = _axes(z, dim)
    out = ax[0] * ax[0]
    for a in ax[1:]:
        out = out + a * a
    return out


def _dot(p, v, dim: int):
    pa, va = _axes(p, dim), _axes(v, dim)
    out = pa[0] * va[0]
    for a, b in zip(pa[1:], va[1:]):
        out = out + a * b
    return out


# ---------------------------------------------------------------------------
# potentials / coefficients


@dataclass(frozen=True)
class PotentialSpec:
    """Scalar field on the torus: cosine terms or a node-sampled table.

    Analytic kinds evaluate anywhere; each (amplitude, frequency, phase) term
    contributes amplitude*sum_axes cos(2*pi*frequency*x_j + phase), except that
    zero-frequency terms contribute the constant amplitude*cos(phase) once.
    """

    name: str  # cosine | sum-of-cosines | table-file
    terms: tuple = ((1.0, 1, 0.0),)
    values: np.ndarray | None = None
    path: str | None = None

    def evaluate(self, x, dim: int):
        if self.name == "table-file":
            raise ConfigurationError("table potentials evaluate on grid nodes only")
        ax = _axes(x, dim)
        out = 0.0
        for amp, freq, phase in self.terms:
            if freq == 0:
                out = out + amp * np.cos(phase) * np.ones_like(ax[0])
            else:
                for a in ax:
                    out = out + amp * np.cos(2.0 * np.pi * freq * a + phase)
        return out

    def sample(self, grid: TorusGrid) -> np.ndarray:
        """Values at every grid node, flattened in canonical node order."""
        if self.name == "table-file":
            if self.values is None:
                raise ConfigurationError("table-file spec has no loaded values")
            if len(self.values) != grid.node_count:
                raise ConfigurationError(
                    f"table length {len(self.values)} != node count {grid.node_count}"
                )
            return np.asarray(self.values, dtype=float)
        coords = grid.coords()
        x = coords[:, 0] if grid.dim == 1 else coords
        return np.asarray(self.evaluate(x, grid.dim), dtype=float)


def cosine(amplitude: float = 1.0, frequency: int = 1, phase: float = 0.0) -> PotentialSpec:
    return PotentialSpec("cosine", terms=((float(amplitude), int(frequency), float(phase)),))


def sum_of_cosines(terms) -> PotentialSpec:
    return PotentialSpec("sum-of-cosines", terms=tuple((float(a), int(f), float(p)) for a, f, p in terms))


def constant(value: float) -> PotentialSpec:
    return PotentialSpec("cosine", terms=((float(value), 0, 0.0),))


def table_from_file(path) -> PotentialSpec:
    """CSV table, one value per line, length must equal the grid node count."""
    lines = Path(path).read_text().strip().splitlines()
    try:
        values = np.array([float(s.strip()) for s in lines if s.strip() != ""])
    except ValueError as exc:
        raise ConfigurationError(f"bad number in table file {path}: {exc}") from None
    return PotentialSpec("table-file", terms=(), values=values, path=str(path))


# ---------------------------------------------------------------------------
# numeric Legendre transform


def legendre_transform_numeric(eval_H, x, v, p_range: float, p_step: float, dim: int = 1) -> float:
    """max over the momentum grid [-P, P]^dim of p.v - H(x, p).

    Deterministic given (p_range, p_step).  Raises RangeExhaustedError when the
    maximizer sits on the box boundary, since then the superlinearity margin
    was too small and the value is unreliable.
    """
    if p_range <= 0 or p_step <= 0:
        raise ConfigurationError("p_range and p_step must be positive")
    axis = np.arange(-p_range, p_range + p_step / 2, p_step)
    if dim == 1:
        p = axis
    else:
        p1, p2 = np.meshgrid(axis, axis, indexing="ij")
        p = np.stack([p1.ravel(), p2.ravel()], axis=-1)
    scores = _dot(p, np.asarray(v, dtype=float), dim) - eval_H(x, p)
    best = int(np.argmax(scores))
    if dim == 1:
        on_boundary = best == 0 or best == len(axis) - 1
    else:
        i, j = divmod(best, len(axis))
        on_boundary = i in (0, len(axis) - 1) or j in (0, len(axis) - 1)
    if on_boundary:
        raise RangeExhaustedError(
            f"Legendre maximizer on the boundary of [-{p_range}, {p_range}]^{dim}"
        )
    return float(scores[best])


def default_momentum_box(graph: EdgeGraph) -> tuple[float, float]:
    """(P, dp) with P = 2*max hop speed + 2 and dp = dx.

    For the quadratic built-ins the maximizing momentum equals dL/dv, bounded
    by the hop speed, so this box keeps the sup interior.
    """
    return 2.0 * graph.controls.max_speed + 2.0, graph.grid.dx


# ---------------------------------------------------------------------------
# models


class LagrangianModel:
    """Evaluator pair (L, H); immutable and safe for concurrent read-only use."""

    kind = "abstract"

    def __init__(self, dim: int):
        self.dim = dim

    def eval_L(self, x, v):
        raise NotImplementedError

    def eval_H(self, x, p):
        raise NotImplementedError

    def edge_lagrangian(self, graph: EdgeGraph) -> np.ndarray:
        """L(src, velocity) for every edge, in canonical edge order."""
        coords = graph.grid.coords(graph.src)
        x = coords[:, 0] if self.dim == 1 else coords
        vels = graph.controls.velocities[graph.vel]
        v = vels[:, 0] if self.dim == 1 else vels
        return np.asarray(self.eval_L(x, v), dtype=float)


class MechanicalModel(LagrangianModel):
    """H = |p|^2/2 + V(x), L = |v|^2/2 - V(x)."""

    kind = "mechanical"

    def __init__(self, potential: PotentialSpec, grid: TorusGrid):
        super().__init__(grid.dim)
        self.potential = potential
        self.grid = grid
        self.potential_values = potential.sample(grid)
        self._analytic = potential.name != "table-file"

    def potential_at(self, x):
        if self._analytic:
            return self.potential.evaluate(x, self.dim)
        idx = self._node_index(x)
        return self.potential_values[idx]

    def _node_index(self, x):
        ax = _axes(x, self.dim)
        scaled = [a * self.grid.n for a in ax]
        idx = [np.rint(s).astype(np.int64) for s in scaled]
        for s, i in zip(scaled, idx):
            if np.max(np.abs(s - i)) > 1e-9:
                raise ConfigurationError("table potential evaluated off the grid")
        if self.dim == 1:
            return idx[0] % self.grid.n
        return (idx[0] % self.grid.n) * self.grid.n + idx[1] % self.grid.n

    def eval_L(self, x, v):
        return 0.5 * _sqnorm(v, self.dim) - self.potential_at(x)

    def eval_H(self, x, p):
        return 0.5 * _sqnorm(p, self.dim) + self.potential_at(x)


class EikonalQuadraticModel(LagrangianModel):
    """H = |p|^2, L = |v|^2/4."""

    kind = "eikonal-quadratic"

    def eval_L(self, x, v):
        return 0.25 * _sqnorm(v, self.dim) + 0.0 * _axes(x, self.dim)[0]

    def eval_H(self, x, p):
        return _sqnorm(p, self.dim) + 0.0 * _axes(x, self.dim)[0]


class TableLagrangianModel(LagrangianModel):
    """L sampled per (node, control velocity); H by numeric conjugacy over the sampled velocities."""

    kind = "table"

    def __init__(self, graph: EdgeGraph, values: np.ndarray):
        super().__init__(graph.grid.dim)
        values = np.asarray(values, dtype=float)
        expected = (graph.grid.node_count, graph.controls.count)
        if values.shape != expected:
            raise ConfigurationError(f"table shape {values.shape} != {expected}")
        self.graph = graph
        self.values = values

    def _node_index(self, x):
        grid = self.graph.grid
        ax = _axes(x, self.dim)
        idx = [np.rint(a * grid.n).astype(np.int64) % grid.n for a in ax]
        if self.dim == 1:
            return idx[0]
        return idx[0] * grid.n + idx[1]

    def _vel_index(self, v):
        controls = self.graph.controls
        ax = _axes(v, self.dim)
        ks = [np.rint(a * controls.dt / self.graph.grid.dx).astype(np.int64) for a in ax]
        j = (ks[0] + controls.m) * (2 * controls.m + 1) ** (self.dim - 1)
        if self.dim == 2:
            j = j + ks[1] + controls.m
        return j

    def eval_L(self, x, v):
        return self.values[self._node_index(x), self._vel_index(v)]

    def eval_H(self, x, p):
        node = np.atleast_1d(self._node_index(x))
        p = np.asarray(p, dtype=float)
        vels = self.graph.controls.velocities
        vcol = vels[:, 0] if self.dim == 1 else vels
        scores = _dot(p[..., None] if self.dim == 1 else p[..., None, :], vcol, self.dim)
        out = np.max(scores - self.values[node], axis=-1)
        return out if out.size > 1 else float(out)

    def edge_lagrangian(self, graph: EdgeGraph) -> np.ndarray:
        if graph is not self.graph:
            raise ConfigurationError("table model bound to a different edge graph")
        return self.values[graph.src, graph.vel]


class ContactModel(LagrangianModel):
    """Lagrangian with explicit dependence on the unknown u.

    Exposes L_G(x, v, u), its u-derivative at u=0, the linear coefficient a(x)
    when G is linear in u (else None), and a Lipschitz constant in u.
    """

    def eval_LG(self, x, v, u):
        raise NotImplementedError

    def eval_dLG_du0(self, x, v):
        raise NotImplementedError

    linear_coefficient = None  # callable x -> a(x), or None
    lipschitz_K = 0.0

    def a_on_grid(self, grid: TorusGrid) -> np.ndarray | None:
        if self.linear_coefficient is None:
            return None
        coords = grid.coords()
        x = coords[:, 0] if grid.dim == 1 else coords
        return np.asarray(self.linear_coefficient(x), dtype=float)

    def edge_dlg0(self, graph: EdgeGraph) -> np.ndarray:
        coords = graph.grid.coords(graph.src)
        x = coords[:, 0] if self.dim == 1 else coords
        vels = graph.controls.velocities[graph.vel]
        v = vels[:, 0] if self.dim == 1 else vels
        return np.asarray(self.eval_dLG_du0(x, v), dtype=float) * np.ones(graph.edge_count)


class SinContactModel(ContactModel):
    """G = sin(u) + |p|^2, hence L_G = |v|^2/4 - sin(u) and dL_G/du(.,.,0) = -1."""

    kind = "eikonal-quadratic"
    name = "sin-contact"
    lipschitz_K = 1.0

    def eval_L(self, x, v):
        return 0.25 * _sqnorm(v, self.dim) + 0.0 * _axes(x, self.dim)[0]

    def eval_H(self, x, p):
        return _sqnorm(p, self.dim) + 0.0 * _axes(x, self.dim)[0]

    def eval_LG(self, x, v, u):
        return self.eval_L(x, v) - np.sin(u)

    def eval_dLG_du0(self, x, v):
        return -1.0 + 0.0 * _axes(x, self.dim)[0]


class LinearDiscountModel(ContactModel):
    """G = a(x) u + H(x, p), hence L_G = L(x, v) - a(x) u exactly."""

    name = "linear-discount"

    def __init__(self, base: LagrangianModel, a_spec: PotentialSpec, grid: TorusGrid):
        super().__init__(grid.dim)
        self.base = base
        self.kind = base.kind
        self.grid = grid
        self.a_spec = a_spec
        self.a_values = a_spec.sample(grid)
        self.lipschitz_K = float(np.max(np.abs(self.a_values)))
        if a_spec.name == "table-file":
            self.linear_coefficient = self._a_table
        else:
            self.linear_coefficient = lambda x: a_spec.evaluate(x, grid.dim)

    def _a_table(self, x):
        ax = _axes(x, self.dim)
        idx = [np.rint(a * self.grid.n).astype(np.int64) % self.grid.n for a in ax]
        flat = idx[0] if self.dim == 1 else idx[0] * self.grid.n + idx[1]
        return self.a_values[flat]

    def eval_L(self, x, v):
        return self.base.eval_L(x, v)

    def eval_H(self, x, p):
        return self.base.eval_H(x, p)

    def edge_lagrangian(self, graph: EdgeGraph) -> np.ndarray:
        return self.base.edge_lagrangian(graph)

    def eval_LG(self, x, v, u):
        return self.base.eval_L(x, v) - self.linear_coefficient(x) * u

    def eval_dLG_du0(self, x, v):
        return -np.asarray(self.linear_coefficient(x), dtype=float)


_BUILTIN_NAMES = ("mechanical", "eikonal2", "sin-contact", "linear-discount")


def make_builtin_model(name: str, params: dict, grid: TorusGrid):
    """Catalogue constructor for the built-in models.

    mechanical(V):         H = |p|^2/2 + V,  L = |v|^2/2 - V
    eikonal2:              H = |p|^2,        L = |v|^2/4
    sin-contact:           G = sin(u) + |p|^2
    linear-discount(a, H): G = a(x) u + H over a mechanical or eikonal2 base
    """
    params = dict(params or {})
    if name == "mechanical":
        potential = params.get("potential")
        if potential is None:
            raise ConfigurationError("mechanical model needs a 'potential' spec")
        return MechanicalModel(potential, grid)
    if name == "eikonal2":
        return EikonalQuadraticModel(grid.dim)
    if name == "sin-contact":
        return SinContactModel(grid.dim)
    if name == "linear-discount":
        a_spec = params.get("a")
        if a_spec is None:
            raise ConfigurationError("linear-discount model needs an 'a' spec")
        base_name = params.get("base", "mechanical")
        if base_name == "mechanical":
            base = MechanicalModel(params.get("potential", cosine()), grid)
        elif base_name == "eikonal2":
            base = EikonalQuadraticModel(grid.dim)
        else:
            raise ConfigurationError(f"unknown base model '{base_name}' for linear-discount")
        return LinearDiscountModel(base, a_spec, grid)
    raise ConfigurationError(f"unknown builtin model '{name}'; choose from {_BUILTIN_NAMES}")
