import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerlab import oracles
from wignerlab.ensembles import EntryDistribution
from wignerlab.oracles import (
    MomentModel,
    PolynomialR,
    cycle_bound_check,
    cycle_count_distribution,
    exhaustive_expectation,
    expected_charpoly_zero_diag,
    graph_grid,
    hermite,
    hermite_bound_ratio,
    hermite_explicit,
    hermite_log,
    markov_ratio,
    net_sup_ratio,
    partial_sum_R,
    partial_sum_R_polynomial,
    r_term_count,
    stirling_cycle_count,
)


def det_z(z):
    return lambda m: np.linalg.det(z * np.eye(m.n) - m.entries)


class TestHermite:
    def test_low_degrees(self):
        z = 0.7
        assert hermite(0, z) == 1.0
        assert hermite(1, z) == pytest.approx(2 * z)
        assert hermite(2, z) == pytest.approx(4 * z * z - 2)
        assert hermite(3, z) == pytest.approx(8 * z ** 3 - 12 * z)

    @given(st.integers(0, 25), st.floats(-3, 3))
    def test_recurrence_matches_explicit_sum(self, n, z):
        assert hermite(n, z) == pytest.approx(hermite_explicit(n, z), rel=1e-9, abs=1e-9)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            hermite(401, 1.0)
        with pytest.raises(ValueError):
            hermite(-1, 1.0)

    @given(st.integers(1, 150), st.floats(-4, 4))
    def test_log_variant(self, n, z):
        h = hermite(n, z)
        s, lg = hermite_log(n, z)
        if h != 0 and math.isfinite(h):
            assert s == np.sign(h)
            assert lg == pytest.approx(math.log(abs(h)), abs=1e-9)

    def test_log_variant_large_degree(self):
        s, lg = hermite_log(1000, 3.0)
        assert math.isfinite(lg) and lg > 1000

    def test_bound_ratio_values(self):
        assert hermite_bound_ratio(1, 0.0) == 0.0
        assert hermite_bound_ratio(2, 0.0) == pytest.approx(math.e / 4)

    def test_bound_ratio_sweep(self):
        z = np.linspace(-5, 5, 201)
        ns = np.arange(1, 201)
        best = np.array([np.max(hermite_bound_ratio(int(n), z)) for n in ns])
        assert np.all(np.isfinite(best))
        assert np.polyfit(np.log(ns), np.log(best), 1)[0] <= 0.05

    def test_expected_charpoly_closed_forms(self):
        for z in (-1.0, 0.3, 2.0):
            assert expected_charpoly_zero_diag(1, z) == pytest.approx(z)
            assert expected_charpoly_zero_diag(2, z) == pytest.approx(z * z - 1)


class TestExhaustive:
    def test_trace_vanishes(self):
        assert exhaustive_expectation(3, lambda m: m.trace()) == 0.0

    def test_entry_square(self):
        assert exhaustive_expectation(3, lambda m: m.entries[0, 1] ** 2) == 1.0

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_hermite(self, n):
        for z in np.arange(-2, 2.01, 0.5):
            lhs = exhaustive_expectation(n, det_z(z)).real
            assert lhs == pytest.approx(expected_charpoly_zero_diag(n, z), abs=1e-10)


class TestCycles:
    def test_small_table(self):
        assert [stirling_cycle_count(3, l) for l in (1, 2, 3)] == [2, 3, 1]
        for n in range(1, 21):
            assert stirling_cycle_count(n, n) == 1
            assert sum(stirling_cycle_count(n, l) for l in range(1, n + 1)) == math.factorial(n)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_against_enumeration(self, n):
        brute = cycle_count_distribution(n)
        assert all(stirling_cycle_count(n, l) == brute[l] for l in range(1, n + 1))

    def test_bound_examples(self):
        assert cycle_bound_check(3, 1) == (2, Fraction(18), True)
        assert cycle_bound_check(1, 1) == (1, Fraction(1), True)

    def test_bound_everywhere(self):
        for n in range(1, 21):
            for l in range(1, n + 1):
                lhs, rhs, ok = cycle_bound_check(n, l)
                assert isinstance(lhs, int) and isinstance(rhs, Fraction)
                assert ok and lhs <= rhs

    def test_range_checks(self):
        with pytest.raises(ValueError):
            stirling_cycle_count(21, 1)
        with pytest.raises(ValueError):
            stirling_cycle_count(3, 0)


class TestRSums:
    @pytest.mark.parametrize("n", [2, 3])
    def test_keystone(self, n):
        m = MomentModel.rademacher()
        for z in np.linspace(-2.5, 2.5, 11):
            exact = exhaustive_expectation(n, lambda a: det_z(z)(a) ** 2).real
            assert partial_sum_R("R3", n, z, m) == pytest.approx(exact, abs=1e-10)

    def test_keystone_n4(self):
        z = 0.6
        exact = exhaustive_expectation(4, lambda a: det_z(z)(a) ** 2).real
        assert partial_sum_R("R3", 4, z) == pytest.approx(exact, abs=1e-10)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_r2_equals_r1(self, n):
        assert partial_sum_R_polynomial("R2", n) == partial_sum_R_polynomial("R1", n)

    def test_r2_equals_r1_other_moments(self):
        m = MomentModel(off_e2=0.4, off_abs4=2.5)
        for z in (-1.2, 0.0, 1.7):
            assert partial_sum_R("R2", 4, z, m) == partial_sum_R("R1", 4, z, m)

    def test_term_counts(self):
        assert [r_term_count(k, 5) for k in oracles.R_KINDS] == [531, 759, 14055, 14400]
        for n in range(1, 6):
            counts = [r_term_count(k, n) for k in oracles.R_KINDS]
            assert counts == sorted(counts)
            assert counts[-1] == math.factorial(n) ** 2

    def test_n1(self):
        # Q(z) = z - 0 for zero diagonal
        assert partial_sum_R("R3", 1, 1.5) == pytest.approx(2.25)

    def test_gaussian_model_keystone_n2(self):
        # E (z^2 - xi^2)^2 = z^4 - 2 z^2 + E xi^4 for real standard gaussian xi
        m = MomentModel.from_distribution(EntryDistribution.real_gaussian())
        z = 0.8
        assert partial_sum_R("R3", 2, z, m) == pytest.approx(z ** 4 - 2 * z * z + 3)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            MomentModel(off_abs4=0.5)
        with pytest.raises(ValueError):
            MomentModel.from_distribution(EntryDistribution.complex_gaussian())
        with pytest.raises(ValueError):
            partial_sum_R_polynomial("R4", 3)
        with pytest.raises(ValueError):
            partial_sum_R_polynomial("R3", 6)


class TestPolynomials:
    def test_monomial_markov(self):
        for n in (1, 3, 8):
            Q = PolynomialR([0] * n + [1])
            assert markov_ratio(Q, graph_grid()) == pytest.approx(1 / n)

    def test_derivative(self):
        Q = PolynomialR([1, 2, 3])
        np.testing.assert_allclose(Q.derivative().coefficients, [2, 6])
        with pytest.raises(ValueError):
            PolynomialR([5]).derivative()

    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=10), st.floats(-2, 2))
    def test_root_form_matches_coefficients(self, roots, z):
        Q = PolynomialR.from_roots(roots)
        P = PolynomialR(Q.coefficients)
        assert Q(z) == pytest.approx(P(z), rel=1e-9, abs=1e-9)
        assert Q.derivative()(z) == pytest.approx(P.derivative()(z), rel=1e-9, abs=1e-8)

    def test_chebyshev_baseline_high_degree(self):
        # T_30(2x - 1) on [0, 1]: max |Q'| = 2 * 30^2 * max |Q|
        t = np.cos((2 * np.arange(30) + 1) * np.pi / 60)
        Q = PolynomialR.from_roots((t + 1) / 2)
        assert markov_ratio(Q, graph_grid(count=64 * 900 + 1)) == pytest.approx(2.0, rel=1e-9)

    def test_net_ratio(self):
        Q = PolynomialR.from_roots([0.3, -1.0])
        grid = np.linspace(-2, 2, 101)
        w = np.ones_like(grid)
        assert net_sup_ratio(Q, grid, w, np.arange(101)) == 1.0
        assert net_sup_ratio(PolynomialR([1.0]), grid, np.exp(-grid ** 2), np.arange(0, 101, 2)) == 1.0
        with pytest.raises(ValueError):
            net_sup_ratio(Q, grid, w, [])

    def test_graph_grid(self):
        g = graph_grid(lambda x: x * (1 - x), count=11)
        assert g[0] == 0 and g[-1] == 1
        assert g[5].imag == pytest.approx(0.25)
