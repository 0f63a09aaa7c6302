from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gamble_sets
from sureloss.core import GambleSet
from sureloss.errors import InvalidInputError
from sureloss.solvers import Status, revised_simplex
from sureloss.lp import (
    Kind,
    StandardLp,
    build_d3,
    build_d4_phase1,
    build_p1,
    build_p3,
    build_p4prime,
    read_block,
    select_omega0,
    start_point_d5,
    start_point_p3,
    start_point_p4prime,
    interior_slack_point,
)


def assert_partition(lp: StandardLp):
    pos = 0
    for _, start, stop in lp.meta.layout:
        assert start == pos
        pos = stop
    assert pos == lp.n


class TestSelectOmega0:
    def test_tie_lowest_index(self):
        assert select_omega0(GambleSet.from_rows([(-1, 2), (3, -1)])) == 0

    def test_counts(self):
        assert select_omega0(GambleSet.from_rows([(-1, 2), (-3, 1)])) == 1

    def test_zero_counts_as_nonnegative(self):
        assert select_omega0(GambleSet.from_rows([(5, 0), (0, 5)])) == 0


class TestBuildP1:
    def test_dimensions(self):
        lp = build_p1(GambleSet.from_rows([(1, -1)]))
        assert (lp.m, lp.n) == (2, 5)
        assert [name for name, _, _ in lp.meta.layout] == ["lambda", "alpha_pos", "alpha_neg", "s"]

    def test_row_reads(self):
        lp = build_p1(GambleSet.from_rows([(1, -1)]))
        # lambda - alpha+ + alpha- + s_a = 0
        np.testing.assert_array_equal(lp.A[0], [1, -1, 1, 1, 0])
        assert lp.b[0] == 0

    def test_unbounded_for_all_negative_gamble(self):
        lp = build_p1(GambleSet.from_rows([(-1, -1)]))
        # lambda = t, alpha = -t, s = 0 is feasible for every t with objective -t
        for t in (1.0, 10.0, 1e6):
            x = np.array([t, 0.0, t, 0.0, 0.0])
            assert lp.residual(x) == 0.0
            assert lp.objective(x) == -t


class TestBuildP3:
    def test_single_gamble(self):
        lp = build_p3(GambleSet.from_rows([(1, -1)]), 0)
        np.testing.assert_array_equal(lp.A, [[-2, -1, 1]])
        np.testing.assert_array_equal(lp.c, [1, 1, 0])
        assert lp.meta.kind == Kind.P3

    def test_two_gambles(self):
        lp = build_p3(GambleSet.from_rows([(1, -2), (-2, 1)]), 0)
        np.testing.assert_array_equal(lp.A, [[-3, 3, -1, 1]])
        np.testing.assert_array_equal(lp.c, [1, -2, 1, 0])

    @given(gamble_sets())
    def test_structure(self, d):
        w0 = select_omega0(d)
        lp = build_p3(d, w0)
        assert np.all(lp.b == 0)
        assert lp.meta.fully_degenerate
        assert lp.m == d.n_outcomes - 1
        assert_partition(lp)

    def test_omega0_range(self):
        with pytest.raises(InvalidInputError):
            build_p3(GambleSet.from_rows([(1, -1)]), 2)


class TestBuildD3:
    def test_all_nonnegative_at_omega0(self):
        lp = build_d3(GambleSet.from_rows([(1, -1), (0, 3)]), 0)
        assert lp.meta.block("v") == slice(3, 3)
        assert np.all(lp.c == 0)

    def test_negative_row(self):
        lp = build_d3(GambleSet.from_rows([(-1, 2)]), 0)
        p, s, v = lp.meta.block("p"), lp.meta.block("s"), lp.meta.block("v")
        assert lp.A[0, p][0] == 3 and lp.A[0, s][0] == -1 and lp.A[0, v][0] == 1
        assert lp.b[0] == 1

    @given(gamble_sets())
    def test_initial_basis_feasible(self, d):
        lp = build_d3(d, select_omega0(d))
        assert np.all(lp.b >= 0)
        assert_partition(lp)
        basis = list(lp.meta.initial_basis)
        B = lp.A[:, basis]
        np.testing.assert_array_equal(B, np.eye(lp.m))
        x = np.zeros(lp.n)
        x[basis] = lp.b
        assert lp.residual(x) == 0.0
        # v_j = -f_j(w0) on N, s_j = f_j(w0) elsewhere, q = 1
        f0 = d.matrix[:, lp.meta.omega0_index]
        assert read_block(lp, x, "q")[0] == 1.0
        assert np.all(read_block(lp, x, "p") == 0)
        np.testing.assert_array_equal(read_block(lp, x, "v"), -f0[f0 < 0])


class TestBuildD4:
    def test_positive_h(self):
        lp, start = build_d4_phase1(GambleSet.from_rows([(1, 1)]), 0)
        assert lp.meta.r == (0.0,)
        assert read_block(lp, start.x, "t")[0] == 1.0

    def test_negative_h(self):
        lp, start = build_d4_phase1(GambleSet.from_rows([(-2, -2)]), 0)
        assert lp.meta.r == (-3.0,)
        assert read_block(lp, start.x, "t")[0] == 1.0

    @given(gamble_sets())
    def test_start_interior_and_feasible(self, d):
        lp, start = build_d4_phase1(d, select_omega0(d))
        assert_partition(lp)
        assert start.x.min() > 0
        assert lp.residual(start.x) <= 1e-10
        assert read_block(lp, start.x, "gamma")[0] == 1.0


class TestBuildP4Prime:
    def test_dimensions_and_r(self):
        d = GambleSet.from_rows([(-2, -2, 1), (1, 1, 1)])
        d4, _ = build_d4_phase1(d, 0)
        lp = build_p4prime(d4)
        assert lp.m == (d.n_outcomes - 1) + d.n_gambles + 1 + 1
        assert lp.meta.kind == Kind.P4_PRIME
        # last row: sum_i r_i lambda_i + mu = 1
        lam = lp.meta.block("lambda")
        np.testing.assert_array_equal(lp.A[-1, lam], d4.meta.r)
        assert lp.b[-1] == 1.0

    def test_wrong_kind(self):
        with pytest.raises(InvalidInputError):
            build_p4prime(build_p3(GambleSet.from_rows([(1, -1)]), 0))

    def test_zero_r_start(self):
        d4, _ = build_d4_phase1(GambleSet.from_rows([(1, 1), (2, 0.5)]), 0)
        lp = build_p4prime(d4)
        start = start_point_p4prime(lp)
        np.testing.assert_allclose(start.y[:2], [-0.5, -0.5])
        assert start.t[-1] == 1.0

    @given(gamble_sets())
    def test_start_feasible(self, d):
        d4, _ = build_d4_phase1(d, select_omega0(d))
        lp = build_p4prime(d4)
        start = start_point_p4prime(lp)
        # the point (y, t) is an interior point of P4': A' y + t = c with t > 0
        assert start.t.min() > 0
        assert np.max(np.abs(d4.A.T @ start.y + start.t - d4.c)) <= 1e-10
        r = np.asarray(d4.meta.r)
        assert r @ start.y[: d.n_gambles] < 1
        assert np.all(start.y[: d.n_gambles] < 0)


class TestStartPoints:
    def test_interior_slack_positive_coefficient(self):
        alpha, s = interior_slack_point(np.array([[2.0]]), np.zeros(1), np.ones(1))
        assert alpha == 3.0 and s[0] == 1.0

    def test_interior_slack_negative_coefficient(self):
        alpha, s = interior_slack_point(np.array([[-2.0]]), np.zeros(1), np.ones(1))
        assert alpha == 1.0 and s[0] == 3.0

    @given(gamble_sets())
    def test_p3_start(self, d):
        lp = build_p3(d, select_omega0(d))
        start = start_point_p3(lp)
        assert start.x.min() >= 1.0
        assert lp.residual(start.x) <= 1e-10

    def test_p3_lambda0_positive(self):
        lp = build_p3(GambleSet.from_rows([(1, -1)]), 0)
        with pytest.raises(InvalidInputError):
            start_point_p3(lp, 0.0)

    def test_d5(self):
        start = start_point_d5(3, 4)
        np.testing.assert_array_equal(start.y, [-0.25] * 3)
        np.testing.assert_array_equal(start.t[:3], [1, 1, 1])
        assert start.t[3] == 0.25
        # q - sum v = 1
        assert start.t[3] - start.y.sum() == 1.0

    @given(gamble_sets(), st.lists(st.floats(0.01, 5.0), min_size=6, max_size=6))
    def test_weak_duality_p3(self, d, lambdas):
        """c'x >= b'y for primal-feasible x and the dual point found by simplex."""
        lp = build_p3(d, select_omega0(d))
        out = revised_simplex(lp, lp.meta.initial_basis)
        if out.status != Status.OPTIMAL:
            return
        y = out.y
        assert np.all(lp.c - lp.A.T @ y >= -1e-9)
        lam_cols = lp.meta.block("lambda")
        lam = np.array(lambdas[: d.n_gambles])
        alpha, s = interior_slack_point(lp.A[:, lam_cols], lp.b, lam)
        x = np.concatenate([lam, [alpha], s])
        assert lp.residual(x) <= 1e-10
        assert lp.objective(x) >= float(lp.b @ y) - 1e-9
