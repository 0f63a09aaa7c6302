"""Primal affine scaling.

Each iteration rescales the problem so the current iterate maps to the
all-ones vector, projects the scaled cost onto the null space of the
scaled constraints and moves against it by a fixed fraction of the
distance to the boundary. On fully degenerate programs that fraction is
capped (2/3 by default), which keeps the dual estimates convergent.
"""

from __future__ import annotations

import time

import numpy as np
from scipy.linalg import LinAlgError, solve_triangular

from ..errors import InvalidStartError
from ..lp import StandardLp, StartPoint
from ._linalg import max_step, spd_solve
from .base import SolveOutcome, SolverOptions, Status, emit, inf_norm

DEFAULT_STEP = 0.95
STALL_DUAL_TOL = 1e-6


def _project(A: np.ndarray, x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dual estimate ``y`` and scaled projected cost ``(I - P) X c``.

    Works from a QR factorisation of ``X A'`` rather than the normal
    equations, so ``A X`` times the projected vector vanishes to machine
    precision even when the iterate has entries of very different sizes.
    """
    XAt = A.T * x[:, None]
    xc = x * c
    if A.shape[0] == 0:
        return np.zeros(0), xc
    Q, R = np.linalg.qr(XAt)
    qc = Q.T @ xc
    projected = xc - Q @ qc
    try:
        y = solve_triangular(R, qc, check_finite=False)
        if not np.all(np.isfinite(y)):
            raise LinAlgError
    except (LinAlgError, ValueError):
        y = np.linalg.lstsq(XAt, xc, rcond=None)[0]
    return y, projected


def affine_scaling(lp: StandardLp, x0: StartPoint, opts: SolverOptions | None = None) -> SolveOutcome:
    """Minimise ``lp`` starting from the strictly feasible point ``x0.x``.

    With ``opts.early_negative`` the run stops as soon as a feasible iterate
    has objective below ``-opts.early_negative_threshold``; this is only
    meaningful on fully degenerate programs, where a single negative value
    proves the objective is unbounded below.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter_ns()
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    if x0.x is None or x0.x.size != n:
        raise InvalidStartError("affine scaling needs a primal start of the right size")
    x = np.array(x0.x, dtype=float)
    feas_scale = 1.0 + inf_norm(b)
    if not np.all(x > 0):
        raise InvalidStartError("starting point is not strictly positive")
    if lp.residual(x) > opts.feas_tol * feas_scale:
        raise InvalidStartError(f"starting point is infeasible (residual {lp.residual(x):.3e})")

    step = opts.step_fraction or DEFAULT_STEP
    if lp.meta.fully_degenerate:
        step = min(step, opts.degenerate_step_cap)
    max_iters = opts.max_iters or 500
    cost_scale = 1.0 + inf_norm(c)

    status = Status.ITER_LIMIT
    ray = None
    y = np.zeros(m)
    t = c.copy()
    objective = float(c @ x)
    rp = lp.residual(x)
    iteration = 0
    for iteration in range(max_iters + 1):
        objective = float(c @ x)
        rp = lp.residual(x)
        if opts.early_negative and objective < -opts.early_negative_threshold and rp <= opts.feas_tol * feas_scale:
            status = Status.EARLY_NEGATIVE
            break

        y, scaled = _project(A, x, c)
        t = c - A.T @ y
        gap = float(x @ t)
        dual_infeas = max(0.0, -float(t.min()))
        emit(opts, iteration, objective, rp, dual_infeas, gap)

        if dual_infeas <= opts.feas_tol * cost_scale and abs(gap) <= opts.gap_tol * (1.0 + abs(objective)):
            status = Status.OPTIMAL
            break
        if iteration == max_iters:
            break

        top = float(scaled.max())
        if top <= 0:
            if float(scaled @ scaled) > 0:
                status = Status.UNBOUNDED
                ray = -x * scaled
            else:
                status = Status.OPTIMAL
            break
        dx = -x * scaled
        x_new = x + (step / top) * dx
        # remove round-off drift from Ax = b
        r = A @ x_new - b
        if r.size and inf_norm(r) > 1e-11 * feas_scale:
            D2new = x_new * x_new
            corr = -D2new * (A.T @ spd_solve((A * D2new) @ A.T, r))
            x_new = x_new + min(1.0, 0.5 * max_step(x_new, corr)) * corr
        new_objective = float(c @ x_new)
        improvement = objective - new_objective
        x = x_new
        if (
            abs(improvement) <= opts.opt_tol * (1.0 + abs(new_objective))
            and dual_infeas <= STALL_DUAL_TOL * cost_scale
            and not (opts.early_negative and new_objective < -opts.early_negative_threshold)
        ):
            objective = new_objective
            rp = lp.residual(x)
            status = Status.OPTIMAL
            break

    objective = float(c @ x)
    return SolveOutcome(
        status=status,
        objective=objective if status != Status.UNBOUNDED else -np.inf,
        x=x,
        y=y,
        t=t,
        ray=ray,
        iterations=iteration,
        primal_residual_inf=lp.residual(x),
        dual_residual_inf=max(0.0, -float(t.min())) if t.size else 0.0,
        duality_gap=abs(float(x @ t)),
        wall_time_ns=time.perf_counter_ns() - start,
    )
