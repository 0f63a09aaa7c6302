"""Exact rational decision of avoiding sure loss for small instances.

Payoffs are rounded to multiples of ``1/denominator`` and then scaled to
integers (the constraints ``sum_w f_i(w) p(w) >= 0`` are homogeneous, so
scaling a gamble does not change the answer). A phase-1 tableau simplex
with Bland's rule then decides whether

    -sum_w f_i(w) p(w) + s_i = 0,   sum_w p(w) + a = 1,   p, s, a >= 0

admits a solution with ``a = 0``. All arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .checker import GRID
from .core import GambleSet
from .errors import InvalidInputError

MAX_SIZE = 16

try:  # gmpy2 rationals are much faster than Fraction; fall back if absent
    from gmpy2 import mpq as _rational
except ImportError:  # pragma: no cover
    _rational = Fraction


def _integer_rows(d: GambleSet, denominator: int) -> list[list[int]]:
    scaled = np.round(d.matrix * denominator)
    return [[int(v) for v in row] for row in scaled]


def exact_oracle_asl(d: GambleSet, denominator: int = GRID) -> bool:
    """``True`` iff the grid-rounded ``d`` avoids sure loss (exact arithmetic)."""
    n, size = d.n_gambles, d.n_outcomes
    if n > MAX_SIZE or size > MAX_SIZE:
        raise InvalidInputError(f"exact oracle limited to {MAX_SIZE} gambles and outcomes, got {n}x{size}")
    F = _integer_rows(d, denominator)

    zero, one = _rational(0), _rational(1)
    # columns: p (size), s (n), a (1), rhs
    n_cols = size + n + 1
    rows: list[list] = []
    for i in range(n):
        row = [_rational(-v) for v in F[i]] + [zero] * (n + 1) + [zero]
        row[size + i] = one
        rows.append(row)
    rows.append([one] * size + [zero] * n + [one, one])
    basis = list(range(size, size + n)) + [size + n]
    # reduced costs of min a: c - c_B B^-1 A with B = I, c_B = e_a
    cost = [zero] * n_cols + [zero]
    cost[size + n] = one
    reduced = [cost[j] - rows[n][j] for j in range(n_cols + 1)]

    while True:
        entering = next((j for j in range(n_cols) if reduced[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best = None
        for r, row in enumerate(rows):
            coef = row[entering]
            if coef > 0:
                ratio = row[-1] / coef
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leaving]):
                    best, leaving = ratio, r
        if leaving is None:  # cannot happen: the phase-1 objective is bounded below
            raise AssertionError("phase-1 problem reported unbounded")
        pivot_row = rows[leaving]
        piv = pivot_row[entering]
        if piv != 1:
            pivot_row = [v / piv for v in pivot_row]
            rows[leaving] = pivot_row
        nonzero = [j for j, v in enumerate(pivot_row) if v != 0]
        for r, row in enumerate(rows):
            factor = row[entering]
            if r != leaving and factor != 0:
                for j in nonzero:
                    row[j] -= factor * pivot_row[j]
        factor = reduced[entering]
        for j in nonzero:
            reduced[j] -= factor * pivot_row[j]
        basis[leaving] = entering

    # optimal value of a equals minus the objective entry of the reduced row
    return -reduced[-1] == 0
