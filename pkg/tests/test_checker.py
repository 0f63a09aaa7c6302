from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gamble_sets
from sureloss.checker import (
    VALID_PAIRS,
    AslVerdict,
    AslWitness,
    Formulation,
    Method,
    MethodChoice,
    SureLossWitness,
    avoids_sure_loss,
    check_asl_witness,
    check_certificate,
    check_sure_loss_witness,
    lower_natural_extension,
    snap_to_grid,
    upper_natural_extension,
)
from sureloss.core import Gamble, GambleSet, Pmf
from sureloss.errors import CertificateError, InvalidInputError, SolverError, UnboundedError
from sureloss.gen import generate_instance
from sureloss.oracle import exact_oracle_asl
from sureloss.solvers import SolverOptions

CHOICES = MethodChoice.all()
IDS = [c.label for c in CHOICES]


class TestMethodChoice:
    def test_table_has_six_pairs(self):
        assert len(VALID_PAIRS) == 6
        assert {c.label for c in CHOICES} == {
            "Simplex P3", "Simplex D3", "Affine scaling P3", "Affine scaling D4'",
            "Primal-dual P3", "Primal-dual D4'",
        }

    @pytest.mark.parametrize("method,formulation", [("simplex", "D4Prime"), ("affine", "D3"), ("primal-dual", "D3")])
    def test_rejects_pairs_outside_table(self, method, formulation):
        with pytest.raises(InvalidInputError):
            MethodChoice(method, formulation)

    def test_accepts_strings(self):
        c = MethodChoice("primal-dual", "D4Prime")
        assert c.method is Method.PRIMAL_DUAL and c.formulation is Formulation.D4_PRIME

    def test_unknown_names(self):
        with pytest.raises(InvalidInputError):
            MethodChoice("newton", "P3")


@pytest.mark.parametrize("choice", CHOICES, ids=IDS)
class TestExamples:
    def test_point_mass(self, choice):
        d = GambleSet.from_rows([(1, -1)])
        v = avoids_sure_loss(d, choice)
        assert v.avoids
        np.testing.assert_array_equal(v.certificate.p.probs, [1, 0])

    def test_single_negative_gamble(self, choice):
        d = GambleSet.from_rows([(-0.5, -0.5)])
        v = avoids_sure_loss(d, choice)
        assert not v.avoids
        np.testing.assert_allclose(v.certificate.lam, [1.0])
        assert v.certificate.alpha == pytest.approx(-0.5)

    def test_hand_solution(self, choice, two_by_two):
        v = avoids_sure_loss(two_by_two["asl"], choice)
        assert v.avoids
        np.testing.assert_allclose(v.certificate.p.probs, [2 / 3, 1 / 3], atol=1e-6)

    def test_sure_loss_pair(self, choice, two_by_two):
        v = avoids_sure_loss(two_by_two["sure_loss"], choice)
        assert not v.avoids
        np.testing.assert_allclose(v.certificate.lam, [0.5, 0.5], atol=1e-6)

    def test_without_fast_path(self, choice):
        d = GambleSet.from_rows([(1, -1), (2, 0.5)])
        v = avoids_sure_loss(d, choice, fast_path=False)
        assert v.avoids and v.source == "solver" and check_certificate(d, v)

    def test_single_outcome(self, choice):
        assert avoids_sure_loss(GambleSet.from_rows([(1.0,), (0.0,)]), choice).avoids
        v = avoids_sure_loss(GambleSet.from_rows([(1.0,), (-1.0,)]), choice)
        assert not v.avoids and check_certificate(GambleSet.from_rows([(1.0,), (-1.0,)]), v)


class TestCertificates:
    def test_asl_witness_check(self):
        d = GambleSet.from_rows([(1, -2), (-1, 2)])
        assert check_asl_witness(d, Pmf([2 / 3, 1 / 3]))
        assert not check_asl_witness(d, Pmf([0.5, 0.5]))
        assert not check_asl_witness(d, Pmf([1.0]))

    def test_sure_loss_witness_check(self):
        d = GambleSet.from_rows([(1, -2), (-2, 1)])
        assert check_sure_loss_witness(d, [1, 1])
        assert not check_sure_loss_witness(d, [1, 0])
        assert not check_sure_loss_witness(d, [-1, 2])
        assert not check_sure_loss_witness(d, [1])

    def test_sure_loss_needs_strict_margin(self):
        d = GambleSet.from_rows([(-1e-9, -1e-9)])
        assert not check_sure_loss_witness(d, [1.0])

    def test_verdict_json(self, two_by_two):
        v = avoids_sure_loss(two_by_two["sure_loss"])
        data = v.to_dict()
        assert data["avoids_sure_loss"] is False
        assert data["certificate"]["type"] == "sure_loss"
        assert data["diagnostics"]["status"] == "unbounded"

    def test_mismatched_certificate_type(self, two_by_two):
        v = avoids_sure_loss(two_by_two["asl"])
        fake = AslVerdict(False, v.certificate, v.diagnostics)
        assert not check_certificate(two_by_two["asl"], fake)

    def test_iteration_limit_is_an_error(self):
        d = generate_instance(5, 16, 16, "not_asl")
        choice = MethodChoice("primal-dual", "P3", SolverOptions(max_iters=2))
        with pytest.raises(SolverError) as info:
            avoids_sure_loss(d, choice, fast_path=False)
        assert info.value.outcome is not None
        assert not isinstance(info.value, CertificateError)

    def test_fallback_used_when_certificate_fails(self, monkeypatch):
        import sureloss.checker as checker

        d = GambleSet.from_rows([(1, -2), (-2, 1)])
        real = checker._sure_loss_witness
        calls = []

        def flaky(dd, lam):
            calls.append(1)
            return None if len(calls) == 1 else real(dd, lam)

        monkeypatch.setattr(checker, "_sure_loss_witness", flaky)
        v = avoids_sure_loss(d, MethodChoice("affine", "P3"))
        assert not v.avoids and v.source == "fallback"
        assert check_certificate(d, v)

    def test_fallback_disagreement_raises(self, monkeypatch):
        import sureloss.checker as checker

        monkeypatch.setattr(checker, "_sure_loss_witness", lambda d, lam: None)
        with pytest.raises(CertificateError):
            avoids_sure_loss(GambleSet.from_rows([(1, -2), (-2, 1)]), MethodChoice("primal-dual", "D4Prime"))


@pytest.mark.parametrize("choice", CHOICES, ids=IDS)
@given(d=gamble_sets(max_n=6, max_m=6))
def test_agrees_with_oracle_and_certifies(choice, d):
    v = avoids_sure_loss(d, choice, fast_path=False)
    assert v.avoids == exact_oracle_asl(d)
    assert check_certificate(d, v)
    if isinstance(v.certificate, SureLossWitness):
        assert v.certificate.lam.sum() == pytest.approx(1.0)
        assert v.certificate.alpha == pytest.approx((v.certificate.lam @ d.matrix).max())
    else:
        assert isinstance(v.certificate, AslWitness)


class TestNaturalExtension:
    def test_empty_set(self):
        g = Gamble([0.3, -1.0, 2.0])
        assert upper_natural_extension(None, g) == 2.0
        assert lower_natural_extension(np.zeros((0, 3)), g) == -1.0

    def test_single_gamble(self):
        e = GambleSet.from_rows([(1, -1)])
        assert upper_natural_extension(e, [0, 1]) == pytest.approx(0.5)
        assert lower_natural_extension(e, [0, 1]) == pytest.approx(0.0)

    @pytest.mark.parametrize("method", ["simplex", "primal-dual"])
    def test_methods_agree(self, method):
        for seed in range(5):
            e = generate_instance(seed, 6, 5, "asl")
            g = np.random.default_rng(seed).random(5)
            assert upper_natural_extension(e, g, method=method) == pytest.approx(upper_natural_extension(e, g), abs=1e-7)
            assert lower_natural_extension(e, g, method=method) == pytest.approx(lower_natural_extension(e, g), abs=1e-7)

    def test_against_linprog(self):
        from scipy.optimize import linprog

        for seed in range(10):
            e = generate_instance(seed, 5, 4, "asl")
            g = np.random.default_rng(100 + seed).normal(size=4)
            # min beta s.t. sum_i lambda_i f_i(w) - beta <= -g(w)
            n = e.n_gambles
            A_ub = np.hstack([e.matrix.T, -np.ones((4, 1))])
            ref = linprog(np.r_[np.zeros(n), 1.0], A_ub=A_ub, b_ub=-g,
                          bounds=[(0, None)] * n + [(None, None)], method="highs")
            assert upper_natural_extension(e, g) == pytest.approx(ref.fun, abs=1e-8)

    def test_constant_shift(self):
        e = generate_instance(1, 4, 4, "asl")
        g = np.array([0.1, 0.7, -0.2, 0.4])
        base = upper_natural_extension(e, g)
        assert upper_natural_extension(e, g + 2.5) == pytest.approx(base + 2.5)
        assert lower_natural_extension(e, g - 1.0) == pytest.approx(lower_natural_extension(e, g) - 1.0)

    def test_sure_loss_is_unbounded(self):
        e = GambleSet.from_rows([(1, -2), (-2, 1)])
        with pytest.raises(UnboundedError):
            upper_natural_extension(e, [0, 1])
        with pytest.raises(UnboundedError):
            lower_natural_extension(e, [0, 1], method="primal-dual")

    def test_dimension_checked(self):
        with pytest.raises(InvalidInputError):
            upper_natural_extension(GambleSet.from_rows([(1, -1)]), [0, 1, 2])

    def test_unknown_method(self):
        with pytest.raises(InvalidInputError):
            upper_natural_extension(None, [0, 1], method="ellipsoid")


def test_snap_to_grid():
    d = GambleSet.from_rows([(0.1234564, -0.9999996)])
    np.testing.assert_array_equal(snap_to_grid(d).matrix, [[0.123456, -1.0]])


@given(gamble_sets(max_n=4, max_m=4), st.integers(0, 3))
def test_natural_extension_sandwich(d, k):
    if not exact_oracle_asl(d):
        return
    g = np.linspace(-1, 1, d.n_outcomes) * (k + 1)
    low = lower_natural_extension(d, g)
    high = upper_natural_extension(d, g)
    assert g.min() - 1e-9 <= low <= high + 1e-9
    assert high <= g.max() + 1e-9
