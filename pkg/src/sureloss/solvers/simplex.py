"""Revised simplex method.

The basis inverse is kept as an LU factorisation of the starting basis
followed by a file of elementary (eta) column updates; the basis is
refactorised every ``REFACTOR_EVERY`` pivots or when a pivot element is
tiny. Pricing is Dantzig's rule while the basic solution is nondegenerate
and switches to Bland's rule (smallest entering and leaving index) as soon
as any basic variable is at zero, which rules out cycling.
"""

from __future__ import annotations

import time
import warnings
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ..errors import InvalidBasisError, SolverError
from ..lp import FormulationMeta, Kind, StandardLp, make_layout
from .base import SolveOutcome, SolverOptions, Status, emit, inf_norm

REFACTOR_EVERY = 50
PIVOT_TOL = 1e-9
TINY_PIVOT = 1e-7
SINGULAR_TOL = 1e-12


class BasisFactor:
    """``B^{-1}`` as ``E_k ... E_1 (LU)^{-1}``."""

    def __init__(self, B: NDArray[np.float64]):
        self.m = B.shape[0]
        if self.m:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                lu, piv = lu_factor(B, check_finite=False)
            diag = np.abs(np.diag(lu))
            if diag.min() <= SINGULAR_TOL * max(1.0, diag.max()):
                raise InvalidBasisError("basis matrix is singular")
            self._lu = (lu, piv)
        self.etas: list[tuple[int, NDArray[np.float64]]] = []

    def solve(self, rhs: NDArray[np.float64]) -> NDArray[np.float64]:
        """FTRAN: ``B^{-1} rhs``."""
        if not self.m:
            return np.zeros(0)
        z = lu_solve(self._lu, rhs, check_finite=False)
        for r, w in self.etas:
            zr = z[r] / w[r]
            z -= zr * w
            z[r] = zr
        return z

    def solve_t(self, rhs: NDArray[np.float64]) -> NDArray[np.float64]:
        """BTRAN: ``B^{-T} rhs``."""
        if not self.m:
            return np.zeros(0)
        v = np.array(rhs, dtype=float)
        for r, w in reversed(self.etas):
            vr = v[r]
            v[r] = (vr - (v @ w - vr * w[r])) / w[r]
        return lu_solve(self._lu, v, trans=1, check_finite=False)

    def update(self, r: int, w: NDArray[np.float64]) -> None:
        self.etas.append((r, w.copy()))


def revised_simplex(
    lp: StandardLp,
    initial_basis: Sequence[int],
    opts: SolverOptions | None = None,
    *,
    visited: list[tuple[int, ...]] | None = None,
) -> SolveOutcome:
    """Minimise ``lp`` from a feasible starting basis.

    ``visited`` (optional) collects every basis the method passes through,
    in order; tests use it to check that no basis repeats.

    Raises :class:`InvalidBasisError` when the starting basis is singular or
    infeasible.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter_ns()
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    basis = [int(j) for j in initial_basis]
    if len(basis) != m or len(set(basis)) != m or any(not 0 <= j < n for j in basis):
        raise InvalidBasisError(f"a basis needs {m} distinct column indices in range")
    max_iters = opts.max_iters or 50 * (m + n)

    factor = BasisFactor(A[:, basis])
    xB = factor.solve(b)
    scale = 1.0 + inf_norm(b)
    if xB.size and xB.min() < -opts.feas_tol * scale:
        raise InvalidBasisError("starting basis is not primal feasible")
    np.clip(xB, 0.0, None, out=xB)

    status = Status.ITER_LIMIT
    ray = None
    y = np.zeros(m)
    d = c.copy()
    iteration = 0
    for iteration in range(max_iters + 1):
        if visited is not None:
            visited.append(tuple(basis))
        y = factor.solve_t(c[basis])
        d = c - A.T @ y
        d[basis] = 0.0
        if opts.trace is not None:
            emit(opts, iteration, float(c[basis] @ xB), 0.0, max(0.0, -float(d.min())), 0.0)

        candidates = np.flatnonzero(d < -opts.opt_tol)
        if candidates.size == 0:
            status = Status.OPTIMAL
            break
        if iteration == max_iters:
            break
        degenerate = xB.size > 0 and xB.min() <= opts.feas_tol
        q = int(candidates[0]) if degenerate else int(np.argmin(d))

        w = factor.solve(A[:, q])
        rows = np.flatnonzero(w > PIVOT_TOL)
        if rows.size == 0:
            status = Status.UNBOUNDED
            ray = np.zeros(n)
            ray[q] = 1.0
            ray[basis] = -w
            np.clip(ray, 0.0, None, out=ray)
            break
        ratios = xB[rows] / w[rows]
        theta = ratios.min()
        ties = rows[ratios <= theta + 1e-12]
        if degenerate:
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            r = int(ties[np.argmax(w[ties])])

        xB -= theta * w
        xB[r] = theta
        np.clip(xB, 0.0, None, out=xB)
        basis[r] = q
        if abs(w[r]) < TINY_PIVOT or len(factor.etas) + 1 >= REFACTOR_EVERY:
            try:
                factor = BasisFactor(A[:, basis])
            except InvalidBasisError as exc:
                raise SolverError("basis became singular during pivoting") from exc
            xB = np.clip(factor.solve(b), 0.0, None)
        else:
            factor.update(r, w)

    x = np.zeros(n)
    x[basis] = xB
    objective = float(c @ x)
    primal_res = inf_norm(A @ x - b)
    dual_res = max(0.0, -float(d.min())) if d.size else 0.0
    return SolveOutcome(
        status=status,
        objective=objective if status != Status.UNBOUNDED else -np.inf,
        x=x,
        y=y,
        t=d,
        ray=ray,
        iterations=iteration,
        primal_residual_inf=primal_res,
        dual_residual_inf=dual_res,
        duality_gap=abs(objective - float(b @ y)),
        wall_time_ns=time.perf_counter_ns() - start,
        basis=tuple(basis),
    )


def slack_basis(lp: StandardLp) -> list[int] | None:
    """Columns forming an identity submatrix with ``b >= 0``, if there are any."""
    A = lp.A
    m = A.shape[0]
    if np.any(lp.b < 0):
        return None
    basis: list[int | None] = [None] * m
    for j in range(A.shape[1]):
        col = A[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] is None:
            basis[nz[0]] = j
    if any(j is None for j in basis):
        return None
    return [int(j) for j in basis]  # type: ignore[arg-type]


def two_phase_simplex(lp: StandardLp, opts: SolverOptions | None = None) -> SolveOutcome:
    """Solve an arbitrary standard-form program (no starting basis needed).

    Uses a slack basis when the columns contain one; otherwise runs a
    phase-1 problem with one artificial variable per row.
    """
    opts = opts or SolverOptions()
    basis = slack_basis(lp)
    if basis is not None:
        return revised_simplex(lp, basis, opts)

    m, n = lp.A.shape
    sign = np.where(lp.b < 0, -1.0, 1.0)
    A1 = np.hstack([sign[:, None] * lp.A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    meta = FormulationMeta(Kind.GENERIC, None, make_layout([("x", n), ("artificial", m)]))
    phase1 = StandardLp(A1, sign * lp.b, c1, meta)
    first = revised_simplex(phase1, list(range(n, n + m)), opts)
    if first.status != Status.OPTIMAL:
        raise SolverError("phase 1 did not finish", first)
    if first.objective > opts.feas_tol * (1.0 + inf_norm(lp.b)):
        return SolveOutcome(Status.INFEASIBLE, None, None, iterations=first.iterations,
                            wall_time_ns=first.wall_time_ns)

    # drive remaining artificials out of the basis where possible
    basis = list(first.basis or ())
    factor = BasisFactor(A1[:, basis])
    for r, j in enumerate(basis):
        if j < n:
            continue
        row = factor.solve_t(np.eye(m)[r])
        for k in range(n):
            if k not in basis and abs(row @ A1[:, k]) > 1e-7:
                basis[r] = k
                factor = BasisFactor(A1[:, basis])
                break
    if any(j >= n for j in basis):
        # redundant rows: keep them with a zero-cost artificial pinned at zero
        A2 = np.hstack([lp.A, np.eye(m)[:, [r for r, j in enumerate(basis) if j >= n]]])
        keep = [r for r, j in enumerate(basis) if j >= n]
        c2 = np.concatenate([lp.c, np.zeros(len(keep))])
        basis2 = [j if j < n else n + keep.index(r) for r, j in enumerate(basis)]
        meta2 = FormulationMeta(Kind.GENERIC, None, make_layout([("x", n), ("artificial", len(keep))]))
        second = revised_simplex(StandardLp(A2, lp.b, c2, meta2), basis2, opts)
        x = second.x[:n] if second.x is not None else None
        ray = second.ray[:n] if second.ray is not None else None
        return SolveOutcome(second.status, second.objective, x, second.y, second.t[:n],
                            ray, second.iterations + first.iterations,
                            second.primal_residual_inf, second.dual_residual_inf,
                            second.duality_gap, second.wall_time_ns + first.wall_time_ns)
    second = revised_simplex(lp, basis, opts)
    return second
