"""Infeasible-start primal-dual path following.

Damped Newton steps on ``Ax = b``, ``A'y + t = c``, ``x_i t_i = mu`` with
``mu = sigma * x't / n`` and a fixed centring parameter ``sigma = 0.1``.
Primal and dual step lengths are chosen separately as ``min(1, eta * max
step)`` so that ``x`` and ``t`` stay strictly positive.
"""

from __future__ import annotations

import time

import numpy as np

from ..errors import InvalidStartError
from ..lp import StandardLp, StartPoint
from ._linalg import max_step, spd_solve
from .base import SolveOutcome, SolverOptions, Status, emit, inf_norm

SIGMA = 0.1
DEFAULT_STEP = 0.995
DIVERGENCE = 1e14


def primal_dual(lp: StandardLp, start: StartPoint, opts: SolverOptions | None = None) -> SolveOutcome:
    """Solve ``lp`` and its dual together from ``start`` (``x > 0``, ``t > 0``).

    Feasibility of the start is not required. The early-negative rule is
    applied only while the primal residual is within ``feas_tol``, since the
    sign argument behind it holds only for feasible points.
    """
    opts = opts or SolverOptions()
    begin = time.perf_counter_ns()
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    if start.x is None or start.t is None:
        raise InvalidStartError("primal-dual needs both x and t")
    if start.x.size != n or start.t.size != n:
        raise InvalidStartError("starting x and t must have one entry per column")
    if not (np.all(start.x > 0) and np.all(start.t > 0)):
        raise InvalidStartError("starting x and t must be strictly positive")
    x = np.array(start.x, dtype=float)
    t = np.array(start.t, dtype=float)
    y = np.zeros(m) if start.y is None else np.array(start.y, dtype=float)
    if y.size != m:
        raise InvalidStartError("starting y must have one entry per row")

    eta = opts.step_fraction or DEFAULT_STEP
    max_iters = opts.max_iters or 500
    feas_p = opts.feas_tol * (1.0 + inf_norm(b))
    feas_d = opts.feas_tol * (1.0 + inf_norm(c))

    status = Status.ITER_LIMIT
    rp_inf = rd_inf = gap = np.inf
    At = np.ascontiguousarray(A.T)
    iteration = 0
    for iteration in range(max_iters + 1):
        rp = A @ x - b
        rp_inf = float(np.abs(rp).max()) if m else 0.0
        objective = float(c @ x)
        if opts.early_negative and rp_inf <= feas_p and objective < -opts.early_negative_threshold:
            status = Status.EARLY_NEGATIVE
            break
        rd = At @ y + t - c
        rd_inf = float(np.abs(rd).max())
        gap = float(x @ t)
        if opts.trace is not None:
            emit(opts, iteration, objective, rp_inf, rd_inf, gap)

        if (
            rp_inf <= feas_p
            and rd_inf <= feas_d
            and gap <= opts.gap_tol
            and abs(objective - float(b @ y)) <= opts.gap_tol
        ):
            status = Status.OPTIMAL
            break
        x_inf = float(x.max())
        if x_inf > DIVERGENCE:
            # x runs off along a ray; it is a primal ray only if Ax - b stays small relative to x
            status = Status.UNBOUNDED if rp_inf <= 1e-8 * x_inf else Status.INFEASIBLE
            break
        if max(inf_norm(y), float(t.max())) > DIVERGENCE:
            status = Status.INFEASIBLE
            break
        if iteration == max_iters:
            break

        mu = SIGMA * gap / n
        ratio = x / t
        M = (A * ratio) @ At
        rhs = -rp - A @ ((mu - x * t + x * rd) / t)
        dy = spd_solve(M, rhs)
        dt = -rd - At @ dy
        dx = (mu - x * t - x * dt) / t

        step_p = min(1.0, eta * max_step(x, dx))
        step_d = min(1.0, eta * max_step(t, dt))
        x += step_p * dx
        y += step_d * dy
        t += step_d * dt

    objective = float(c @ x)
    return SolveOutcome(
        status=status,
        objective=objective if status != Status.UNBOUNDED else -np.inf,
        x=x,
        y=y,
        t=t,
        iterations=iteration,
        primal_residual_inf=inf_norm(A @ x - b),
        dual_residual_inf=inf_norm(A.T @ y + t - c),
        duality_gap=float(x @ t),
        wall_time_ns=time.perf_counter_ns() - begin,
    )
