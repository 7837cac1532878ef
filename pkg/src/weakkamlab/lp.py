"""Dense two-phase primal simplex with Bland's rule.

Solves min c.x subject to A x = b, x >= 0.  Everything here is deterministic:
entering variables take the lowest eligible index, ratio-test ties resolve to
the row whose basic variable has the lowest index, so repeated solves of the
same program produce identical vertices.  Bland's rule precludes cycling.

Rows are scaled to unit max-norm before solving and all comparisons use the
absolute tolerance TOL on the scaled data.  Redundant rows surface in phase
one as zero-level artificials that cannot be pivoted out; they are dropped and
their dual multipliers reported as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InternalError

TOL = 1e-9


@dataclass(frozen=True)
class LinearProgram:
    """min c.x s.t. A x = b, x >= 0 (equality form; add slacks yourself)."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.shape != (b.shape[0], c.shape[0]):
            raise ConfigurationError(
                f"dimension mismatch: A is {A.shape}, b has {b.shape[0]} rows, c has {c.shape[0]} entries"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ConfigurationError("LP data must be finite")


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    value: float = np.nan
    x: np.ndarray | None = None
    y: np.ndarray | None = None  # dual multipliers of the equality rows
    iterations: int = 0


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _simplex(T: np.ndarray, basis: np.ndarray, ncols: int) -> tuple[str, int]:
    """Run Bland-rule pivots on tableau T until optimal or unbounded.

    T layout: rows 0..m-1 are constraints with the rhs in the last column,
    row m holds reduced costs (its last entry is minus the objective value).
    Only columns < ncols are eligible to enter.
    """
    m = T.shape[0] - 1
    iters = 0
    while True:
        red = T[m, :ncols]
        eligible = np.flatnonzero(red < -TOL)
        if eligible.size == 0:
            return "optimal", iters
        col = int(eligible[0])  # Bland: lowest index
        colvals = T[:m, col]
        rows = np.flatnonzero(colvals > TOL)
        if rows.size == 0:
            return "unbounded", iters
        ratios = T[rows, -1] / colvals[rows]
        best = np.min(ratios)
        tied = rows[ratios <= best + TOL * (1.0 + abs(best))]
        row = int(tied[np.argmin(basis[tied])])  # Bland: lowest basic index leaves
        _pivot(T, basis, row, col)
        iters += 1


def solve_lp(program: LinearProgram) -> LpSolution:
    """Two-phase simplex; returns status, optimal value, vertex and duals."""
    A = program.A.copy()
    b = program.b.copy()
    c = program.c.copy()
    m, n = A.shape

    # row scaling to unit max-norm; zero rows are trivially feasible or infeasible
    scale = np.max(np.abs(A), axis=1) if n else np.zeros(m)
    keep = []
    for i in range(m):
        if scale[i] <= 0.0:
            if abs(b[i]) > TOL:
                return LpSolution(status="infeasible")
        else:
            keep.append(i)
    row_map = np.array(keep, dtype=int)
    A = A[row_map] / scale[row_map, None]
    b = b[row_map] / scale[row_map]
    sign = np.where(b < 0.0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign
    k = len(row_map)

    if k == 0:
        if np.any(c < -TOL):
            return LpSolution(status="unbounded")
        x = np.zeros(n)
        return LpSolution(status="optimal", value=0.0, x=x, y=np.zeros(m))

    # phase 1: minimize the sum of artificials
    T = np.zeros((k + 1, n + k + 1))
    T[:k, :n] = A
    T[:k, n : n + k] = np.eye(k)
    T[:k, -1] = b
    T[k, :n] = -A.sum(axis=0)
    T[k, -1] = -b.sum()
    basis = np.arange(n, n + k)
    status, it1 = _simplex(T, basis, n + k)
    if status != "optimal":
        raise InternalError("phase-1 objective is bounded below; simplex reported unbounded")
    if -T[k, -1] > 1e-7:
        return LpSolution(status="infeasible", iterations=it1)

    # drive zero-level artificials out of the basis; drop structurally redundant rows
    drop = []
    for i in range(k):
        if basis[i] >= n:
            pivots = np.flatnonzero(np.abs(T[i, :n]) > 1e-7)
            if pivots.size:
                _pivot(T, basis, i, int(pivots[0]))
            else:
                drop.append(i)
    if drop:
        keep_rows = np.setdiff1d(np.arange(k), np.array(drop))
        T = T[np.concatenate([keep_rows, [k]])]
        basis = basis[keep_rows]
        row_map = row_map[keep_rows]
        sign = sign[keep_rows]
        A = A[keep_rows]
        k = len(keep_rows)

    # phase 2 on the original columns
    T2 = np.zeros((k + 1, n + 1))
    T2[:k, :n] = T[:k, :n]
    T2[:k, -1] = T[:k, -1]
    T2[k, :n] = c
    for i in range(k):
        if c[basis[i]] != 0.0:
            T2[k] -= c[basis[i]] * T2[i]
    status, it2 = _simplex(T2, basis, n)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=it1 + it2)

    x = np.zeros(n)
    x[basis] = T2[:k, -1]
    x[x < 0.0] = np.where(x[x < 0.0] > -1e-7, 0.0, x[x < 0.0])
    value = float(c @ x)

    # duals from B^T y = c_B on the scaled rows, mapped back to the originals
    y = np.zeros(m)
    if k:
        B = A[:, basis].T
        try:
            y_scaled = np.linalg.solve(B, c[basis])
        except np.linalg.LinAlgError:
            y_scaled, *_ = np.linalg.lstsq(B, c[basis], rcond=None)
        y[row_map] = y_scaled * sign / scale[row_map]
    return LpSolution(status="optimal", value=value, x=x, y=y, iterations=it1 + it2)
