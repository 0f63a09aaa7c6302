"""Standard-form linear programs for the avoiding-sure-loss check.

Every builder returns a :class:`StandardLp` (``min c'x, Ax = b, x >= 0``)
whose :class:`FormulationMeta` names the column blocks, so solution
vectors can be mapped back to gamble coefficients or probabilities.

Column layouts (``M`` outcomes, ``n`` gambles, ``w0`` the reference outcome):

==========  ===============================================  ==========
kind        columns                                          rows
==========  ===============================================  ==========
P1          lambda(n), alpha+, alpha-, s(M)                  M
P3          lambda(n), alpha, s(M-1)                         M-1
D3          p(M-1), s(n), v(|N|), q                          n+1
D4Phase1    p(M-1), t(n), q, gamma                           n+1
P4Prime     lambda(n), alpha, s(M-1), u(n), beta, mu         M-1+n+2
==========  ===============================================  ==========

P4Prime is the dual of D4Phase1 written as equalities; its ``lambda`` and
``alpha`` columns are free (listed in ``meta.free_columns``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import GambleSet
from .errors import InvalidInputError


class Kind(str, enum.Enum):
    P1 = "P1"
    P3 = "P3"
    D3 = "D3"
    D4_PHASE1 = "D4Phase1"
    P4_PRIME = "P4Prime"
    NATEXT = "NatExt"
    GENERIC = "Generic"


@dataclass(frozen=True)
class FormulationMeta:
    """Bookkeeping needed to read certificates off a solution vector."""

    kind: Kind
    omega0_index: int | None
    layout: tuple[tuple[str, int, int], ...]
    fully_degenerate: bool = False
    # outcome index of each non-reference outcome, in column order
    other_outcomes: tuple[int, ...] = ()
    initial_basis: tuple[int, ...] | None = None
    # D3: +1 for rows of gambles with f(w0) >= 0, -1 for negated rows
    row_signs: tuple[float, ...] = ()
    # D4Phase1 / P4Prime: coefficients of gamma in the gamble rows
    r: tuple[float, ...] = ()
    free_columns: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        pos = 0
        for name, start, stop in self.layout:
            if start != pos or stop < start:
                raise InvalidInputError(f"layout block {name!r} does not tile the columns")
            pos = stop

    @property
    def n_columns(self) -> int:
        return self.layout[-1][2] if self.layout else 0

    def block(self, name: str) -> slice:
        for block_name, start, stop in self.layout:
            if block_name == name:
                return slice(start, stop)
        raise KeyError(name)

    def has_block(self, name: str) -> bool:
        return any(block_name == name for block_name, _, _ in self.layout)


def make_layout(blocks: Iterable[tuple[str, int]]) -> tuple[tuple[str, int, int], ...]:
    out = []
    pos = 0
    for name, size in blocks:
        out.append((name, pos, pos + size))
        pos += size
    return tuple(out)


@dataclass(frozen=True, eq=False)
class StandardLp:
    """``min c'x`` subject to ``Ax = b`` and ``x >= 0`` (except free columns)."""

    A: NDArray[np.float64] = field(repr=False)
    b: NDArray[np.float64] = field(repr=False)
    c: NDArray[np.float64] = field(repr=False)
    meta: FormulationMeta

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float).reshape(-1)
        if A.ndim != 2:
            A = A.reshape(b.size, c.size)
        if A.shape != (b.size, c.size):
            raise InvalidInputError(f"inconsistent LP shapes A{A.shape}, b({b.size}), c({c.size})")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InvalidInputError("LP data contains non-finite entries")
        if self.meta.layout and self.meta.n_columns != c.size:
            raise InvalidInputError("layout does not cover the columns")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def residual(self, x: ArrayLike) -> float:
        """``||Ax - b||_inf``."""
        r = self.A @ np.asarray(x, dtype=float) - self.b
        return float(np.max(np.abs(r))) if r.size else 0.0

    def objective(self, x: ArrayLike) -> float:
        return float(self.c @ np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class StartPoint:
    """Starting iterate; ``x`` primal, ``y`` free duals, ``t`` dual slacks."""

    x: NDArray[np.float64] | None = None
    y: NDArray[np.float64] | None = None
    t: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        for name in ("x", "y", "t"):
            value = getattr(self, name)
            if value is not None:
                arr = np.array(value, dtype=float).reshape(-1)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.x is not None and self.x.size and not np.all(self.x > 0):
            raise InvalidInputError("starting x must be strictly positive")
        if self.t is not None and self.t.size and not np.all(self.t > 0):
            raise InvalidInputError("starting t must be strictly positive")

    def combine(self, other: "StartPoint") -> "StartPoint":
        """Fill missing parts from ``other`` (primal from one, dual from another)."""
        return StartPoint(
            x=self.x if self.x is not None else other.x,
            y=self.y if self.y is not None else other.y,
            t=self.t if self.t is not None else other.t,
        )


# -- reference outcome ------------------------------------------------------


def select_omega0(d: GambleSet) -> int:
    """Outcome where the most gambles are nonnegative (lowest index on ties)."""
    counts = np.count_nonzero(d.matrix >= 0, axis=0)
    return int(np.argmax(counts))


def _others(size: int, omega0: int) -> list[int]:
    if not 0 <= omega0 < size:
        raise InvalidInputError(f"omega0={omega0} outside 0..{size - 1}")
    return [w for w in range(size) if w != omega0]


# -- builders ---------------------------------------------------------------


def build_p1(d: GambleSet) -> StandardLp:
    """``min alpha`` s.t. ``sum_i f_i(w) lambda_i - alpha <= 0`` for every ``w``.

    The free ``alpha`` is split as ``alpha+ - alpha-``; each row gets a slack.
    """
    F = d.matrix
    n, size = F.shape
    A = np.hstack([F.T, -np.ones((size, 1)), np.ones((size, 1)), np.eye(size)])
    c = np.zeros(n + 2 + size)
    c[n], c[n + 1] = 1.0, -1.0
    layout = make_layout([("lambda", n), ("alpha_pos", 1), ("alpha_neg", 1), ("s", size)])
    meta = FormulationMeta(
        Kind.P1, None, layout, fully_degenerate=True,
        other_outcomes=tuple(range(size)),
        initial_basis=tuple(range(n + 2, n + 2 + size)),
    )
    return StandardLp(A, np.zeros(size), c, meta)


def build_p3(d: GambleSet, omega0: int) -> StandardLp:
    """Reduced primal: one row per ``w != w0``,
    ``sum_i (f_i(w) - f_i(w0)) lambda_i - alpha + s(w) = 0``,
    objective ``sum_i f_i(w0) lambda_i + alpha``.
    """
    F = d.matrix
    n, size = F.shape
    others = _others(size, omega0)
    m = len(others)
    A = np.empty((m, n + 1 + m))
    A[:, :n] = (F[:, others] - F[:, [omega0]]).T
    A[:, n] = -1.0
    A[:, n + 1:] = np.eye(m)
    c = np.zeros(n + 1 + m)
    c[:n] = F[:, omega0]
    c[n] = 1.0
    meta = FormulationMeta(
        Kind.P3, omega0, make_layout([("lambda", n), ("alpha", 1), ("s", m)]),
        fully_degenerate=True, other_outcomes=tuple(others),
        initial_basis=tuple(range(n + 1, n + 1 + m)),
    )
    return StandardLp(A, np.zeros(m), c, meta)


def build_d3(d: GambleSet, omega0: int) -> StandardLp:
    """Phase-1 form of the reduced dual with artificials on negative rows.

    Gambles with ``f_j(w0) < 0`` (the set ``N``) have their row negated and
    receive an artificial ``v_j``; the objective is ``sum_j v_j``. The
    initial basis is ``v_j`` or ``s_j`` per gamble row plus ``q``.
    """
    F = d.matrix
    n, size = F.shape
    others = _others(size, omega0)
    m_p = len(others)
    f0 = F[:, omega0]
    negative = np.flatnonzero(f0 < 0)
    n_v = negative.size
    signs = np.where(f0 < 0, -1.0, 1.0)

    n_cols = m_p + n + n_v + 1
    A = np.zeros((n + 1, n_cols))
    A[:n, :m_p] = signs[:, None] * (f0[:, None] - F[:, others])
    A[:n, m_p:m_p + n] = np.diag(signs)
    A[negative, m_p + n + np.arange(n_v)] = 1.0
    A[n, :m_p] = 1.0
    A[n, -1] = 1.0
    b = np.append(np.abs(f0), 1.0)
    c = np.zeros(n_cols)
    c[m_p + n:m_p + n + n_v] = 1.0

    basis = [m_p + j for j in range(n)]
    for k, j in enumerate(negative):
        basis[j] = m_p + n + k
    basis.append(n_cols - 1)
    meta = FormulationMeta(
        Kind.D3, omega0,
        make_layout([("p", m_p), ("s", n), ("v", n_v), ("q", 1)]),
        other_outcomes=tuple(others), initial_basis=tuple(basis),
        row_signs=tuple(signs.tolist()),
    )
    return StandardLp(A, b, c, meta)


def build_d4_phase1(d: GambleSet, omega0: int) -> tuple[StandardLp, StartPoint]:
    """``min gamma`` phase-1 problem with its closed-form interior start.

    The start uses ``p(w) = q = 1/M``; ``t_i = h_i`` where ``h_i > 0``
    (so ``r_i = 0``) and ``t_i = 1`` otherwise, with ``r_i = h_i - t_i``.
    """
    F = d.matrix
    n, size = F.shape
    others = _others(size, omega0)
    m_p = len(others)
    f0 = F[:, omega0]
    a = f0[:, None] - F[:, others]
    p0 = 1.0 / size
    h = f0 - a.sum(axis=1) * p0
    t0 = np.where(h > 0, h, 1.0)
    r = np.where(h > 0, 0.0, h - 1.0)

    n_cols = m_p + n + 2
    A = np.zeros((n + 1, n_cols))
    A[:n, :m_p] = a
    A[:n, m_p:m_p + n] = np.eye(n)
    A[:n, -1] = r
    A[n, :m_p] = 1.0
    A[n, m_p + n] = 1.0
    b = np.append(f0, 1.0)
    c = np.zeros(n_cols)
    c[-1] = 1.0
    meta = FormulationMeta(
        Kind.D4_PHASE1, omega0,
        make_layout([("p", m_p), ("t", n), ("q", 1), ("gamma", 1)]),
        other_outcomes=tuple(others), r=tuple(r.tolist()),
    )
    x0 = np.concatenate([np.full(m_p, p0), t0, [p0, 1.0]])
    return StandardLp(A, b, c, meta), StartPoint(x=x0)


def build_p4prime(d4p: StandardLp) -> StandardLp:
    """Dual of the phase-1 problem as equality constraints.

    Rows follow the phase-1 columns: ``s(w)`` rows, ``lambda_i + u_i = 0``,
    ``alpha + beta = 0`` and ``sum_i r_i lambda_i + mu = 1``. The objective
    ``max sum_i f_i(w0) lambda_i + alpha`` is stored negated as a minimum.
    """
    if d4p.meta.kind != Kind.D4_PHASE1:
        raise InvalidInputError(f"expected a D4Phase1 program, got {d4p.meta.kind.value}")
    m, n_cols = d4p.A.shape
    n = m - 1
    m_p = n_cols - n - 2
    A = np.hstack([d4p.A.T, np.eye(n_cols)])
    c = np.concatenate([-d4p.b, np.zeros(n_cols)])
    meta = FormulationMeta(
        Kind.P4_PRIME, d4p.meta.omega0_index,
        make_layout([("lambda", n), ("alpha", 1), ("s", m_p), ("u", n), ("beta", 1), ("mu", 1)]),
        other_outcomes=d4p.meta.other_outcomes, r=d4p.meta.r,
        free_columns=tuple(range(n + 1)),
    )
    return StandardLp(A, d4p.c.copy(), c, meta)


# -- starting points --------------------------------------------------------


def interior_slack_point(a: NDArray[np.float64], b: NDArray[np.float64], lambda0: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
    """Interior solution of ``a @ lambda - alpha + s = b`` for fixed ``lambda``.

    Returns ``(alpha, s)`` with ``alpha >= 1`` and ``s > 0``.
    """
    slack = b - a @ lambda0
    delta = float(slack.min()) if slack.size else 0.0
    alpha = 1.0 + max(0.0, -delta)
    return alpha, slack + alpha


def start_point_p3(lp: StandardLp, lambda0: float = 1.0) -> StartPoint:
    """Closed-form strictly positive feasible point of a P3 program."""
    if lp.meta.kind != Kind.P3:
        raise InvalidInputError(f"expected a P3 program, got {lp.meta.kind.value}")
    if not lambda0 > 0:
        raise InvalidInputError("lambda0 must be positive")
    lam = lp.meta.block("lambda")
    lambdas = np.full(lam.stop - lam.start, float(lambda0))
    alpha, s = interior_slack_point(lp.A[:, lam], lp.b, lambdas)
    return StartPoint(x=np.concatenate([lambdas, [alpha], s]))


def start_point_d5(n: int, m_omega: int) -> StartPoint:
    """Dual-side start for the primal-dual run on P3.

    ``y`` is the ``v`` block (``-1/M`` each); ``t`` holds the dual slacks in
    P3 column order: ``t_i = 1`` for the gambles, then ``q = 1/M``, then
    ``p(w) = 1/M``.
    """
    if n < 1 or m_omega < 2:
        raise InvalidInputError("need n >= 1 gambles and at least 2 outcomes")
    share = 1.0 / m_omega
    y = np.full(m_omega - 1, -share)
    t = np.concatenate([np.ones(n), [share], np.full(m_omega - 1, share)])
    return StartPoint(y=y, t=t)


def start_point_p4prime(lp: StandardLp) -> StartPoint:
    """Interior feasible point of P4Prime, returned as the dual side of D4Phase1.

    ``y = (lambda, alpha)`` and ``t = (s, u, beta, mu)``: every ``lambda_i``
    equals ``-0.5 / (1 + sum_j max(-r_j, 0))`` which keeps
    ``sum_i r_i lambda_i < 1``; ``beta`` and ``s`` come from the same
    construction as :func:`start_point_p3` with ``alpha = -beta``.
    """
    if lp.meta.kind != Kind.P4_PRIME:
        raise InvalidInputError(f"expected a P4Prime program, got {lp.meta.kind.value}")
    r = np.asarray(lp.meta.r, dtype=float)
    lam_cols = lp.meta.block("lambda")
    s_rows = lp.meta.block("s")
    scale = 0.5 / (1.0 + np.clip(-r, 0.0, None).sum())
    lambdas = np.full(r.size, -scale)
    u = -lambdas
    mu = 1.0 - float(r @ lambdas)
    # leading rows: sum_i a_i(w) lambda_i - beta + s(w) = 0 once alpha = -beta
    n_p = s_rows.stop - s_rows.start
    beta, s = interior_slack_point(lp.A[:n_p, lam_cols], np.zeros(n_p), lambdas)
    y = np.concatenate([lambdas, [-beta]])
    t = np.concatenate([s, u, [beta, mu]])
    return StartPoint(y=y, t=t)


def default_start(lp: StandardLp) -> StartPoint:
    """Generic infeasible start ``x = t = 1, y = 0`` for arbitrary programs."""
    return StartPoint(x=np.ones(lp.n), y=np.zeros(lp.m), t=np.ones(lp.n))


def read_block(lp: StandardLp, x: ArrayLike, name: str) -> NDArray[np.float64]:
    return np.asarray(x, dtype=float)[lp.meta.block(name)]


__all__: Sequence[str] = [
    "Kind", "FormulationMeta", "StandardLp", "StartPoint", "select_omega0",
    "build_p1", "build_p3", "build_d3", "build_d4_phase1", "build_p4prime",
    "start_point_p3", "start_point_d5", "start_point_p4prime", "default_start",
    "interior_slack_point", "make_layout", "read_block",
]
