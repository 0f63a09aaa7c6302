"""Options and results shared by the three LP methods."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    EARLY_NEGATIVE = "early_negative"
    INFEASIBLE = "infeasible"
    ITER_LIMIT = "iter_limit"


TRACE_HEADER = "iteration,objective,primal_residual,dual_residual,gap"


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and switches; ``None`` picks the per-method default.

    Defaults: ``max_iters`` is ``50 * (m + n)`` for the simplex method and
    500 for the interior-point methods; ``step_fraction`` is 0.95 for affine
    scaling and 0.995 for primal-dual.

    ``trace`` receives one CSV line per iteration (see ``TRACE_HEADER``).
    """

    max_iters: int | None = None
    feas_tol: float = 1e-9
    opt_tol: float = 1e-8
    gap_tol: float = 1e-8
    early_negative: bool = False
    early_negative_threshold: float = 1e-7
    step_fraction: float | None = None
    degenerate_step_cap: float = 2.0 / 3.0
    trace: Callable[[str], None] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for name in ("feas_tol", "opt_tol", "gap_tol", "early_negative_threshold", "degenerate_step_cap"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.step_fraction is not None and not 0 < self.step_fraction < 1:
            raise InvalidInputError("step_fraction must lie in (0, 1)")
        if self.max_iters is not None and self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")

    def with_(self, **changes) -> "SolverOptions":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    """What a solver returns.

    ``ray`` is set when unboundedness was detected along an explicit
    direction (simplex ratio test, affine scaling direction); ``y`` and
    ``t`` are dual multipliers and dual slacks when the method has them.
    """

    status: Status
    objective: float | None
    x: NDArray[np.float64] | None
    y: NDArray[np.float64] | None = None
    t: NDArray[np.float64] | None = None
    ray: NDArray[np.float64] | None = None
    iterations: int = 0
    primal_residual_inf: float = float("nan")
    dual_residual_inf: float = float("nan")
    duality_gap: float = float("nan")
    wall_time_ns: int = 0
    basis: tuple[int, ...] | None = None

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.objective if self.objective is not None and np.isfinite(self.objective) else None,
            "iterations": self.iterations,
            "primal_residual_inf": self.primal_residual_inf,
            "dual_residual_inf": self.dual_residual_inf,
            "duality_gap": self.duality_gap,
            "wall_time_ns": self.wall_time_ns,
        }


def inf_norm(v: NDArray[np.float64]) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def emit(opts: SolverOptions, iteration: int, objective: float, rp: float, rd: float, gap: float) -> None:
    if opts.trace is not None:
        opts.trace(f"{iteration},{objective:.17g},{rp:.6e},{rd:.6e},{gap:.6e}")
