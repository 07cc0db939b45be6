import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wignerlab.potential import (
    SEMICIRCLE,
    AtomicMeasure,
    IntervalQuery,
    QuadratureError,
    chebyshev_grid,
    dist_potential,
    dist_potential_with_error,
    fs_density,
    interval_discrepancy,
    interval_mass,
    inverse_joukowski,
    log_potential,
    mass_outside,
    potential_gap,
    sc_cdf,
    sc_cdf_integral,
    sc_density,
    sc_potential,
    sc_quantile,
    w1_distance,
)

atoms_st = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=12)


def quad_potential(z):
    """Direct quadrature of the semicircle log potential at complex z."""
    f = lambda a: math.log(abs(z - a)) * math.sqrt(4 - a * a) / (2 * math.pi)
    if abs(z.imag) < 1e-14 and -2 < z.real < 2:
        left, _ = integrate.quad(f, -2, z.real, limit=200)
        right, _ = integrate.quad(f, z.real, 2, limit=200)
        return left + right
    val, _ = integrate.quad(f, -2, 2, limit=200, epsabs=1e-13)
    return val


class TestSemicircle:
    def test_density_values(self):
        assert sc_density(0.0) == pytest.approx(1 / math.pi, abs=1e-15)
        assert sc_density(2.0) == 0.0
        assert sc_density(3.0) == 0.0

    def test_cdf_values(self):
        assert sc_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert sc_cdf(2.0) == 1.0
        assert sc_cdf(-5.0) == 0.0
        ref, _ = integrate.quad(sc_density, -2, 1, epsabs=1e-13)
        assert abs(sc_cdf(1.0) - ref) <= 1e-10

    def test_cdf_integral_matches_quadrature(self):
        for x in (-1.5, 0.0, 0.7, 2.0):
            ref, _ = integrate.quad(sc_cdf, -2, x, epsabs=1e-13)
            assert sc_cdf_integral(x) == pytest.approx(ref, abs=1e-10)
        assert sc_cdf_integral(3.0) == pytest.approx(3.0, abs=1e-14)

    @given(st.floats(0.0, 1.0))
    def test_quantile_inverts_cdf(self, q):
        assert sc_cdf(sc_quantile(q)) == pytest.approx(q, abs=1e-12)

    def test_inverse_joukowski(self):
        assert inverse_joukowski(2.0) == pytest.approx(1.0)
        assert abs(inverse_joukowski(0.0)) == pytest.approx(1.0)
        assert inverse_joukowski(2.5) == pytest.approx(0.5)

    @given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
    def test_inverse_joukowski_in_disc(self, z):
        w = inverse_joukowski(z)
        assert abs(w) <= 1 + 1e-12
        if abs(w) > 1e-8:
            assert abs(w + 1 / w - z) <= 1e-8 * max(1.0, abs(z))

    def test_potential_on_segment(self):
        x = np.linspace(-2, 2, 41)
        np.testing.assert_allclose(sc_potential(x), (x * x - 2) / 4, atol=1e-14)
        assert sc_potential(0.0) == pytest.approx(-0.5)
        assert sc_potential(2.0) == pytest.approx(0.5)

    def test_potential_asymptotics(self):
        assert abs(sc_potential(10.0) - math.log(10)) <= 1.2e-2
        assert abs(sc_potential(100.0) - math.log(100)) <= 1.2e-4

    @pytest.mark.parametrize("z", [1 + 1j, -0.3 + 0.01j, 3.0, -2.5 - 2j, 0.5, 1.9999])
    def test_potential_against_quadrature(self, z):
        assert sc_potential(complex(z)) == pytest.approx(quad_potential(complex(z)), abs=1e-8)


class TestAtomicMeasure:
    def test_sorted_and_readonly(self):
        mu = AtomicMeasure([3.0, -1.0, 2.0])
        assert list(mu.atoms) == [-1.0, 2.0, 3.0]
        with pytest.raises(ValueError):
            mu.atoms[0] = 5.0

    def test_rejects_empty_and_nan(self):
        with pytest.raises(ValueError):
            AtomicMeasure([])
        with pytest.raises(ValueError):
            AtomicMeasure([0.0, float("nan")])

    @given(atoms_st)
    def test_text_round_trip(self, atoms):
        mu = AtomicMeasure(atoms)
        assert AtomicMeasure.from_text(mu.to_text()) == mu

    def test_equality_and_hash(self):
        assert AtomicMeasure([1, 0]) == AtomicMeasure([0, 1])
        assert hash(AtomicMeasure([1, 0])) == hash(AtomicMeasure([0, 1]))


class TestLogPotential:
    def test_values(self):
        assert log_potential(AtomicMeasure([0.0]), math.e) == pytest.approx(1.0)
        assert log_potential(AtomicMeasure([-1.0, 1.0]), 0.0) == pytest.approx(0.0)
        assert log_potential(AtomicMeasure([-1.0, 1.0]), 3.0) == pytest.approx(0.5 * (math.log(4) + math.log(2)))

    def test_minus_infinity_at_atom(self):
        assert log_potential(AtomicMeasure([0.5, 1.0]), 0.5) == -math.inf

    def test_chunking_is_invisible(self, rng):
        mu = AtomicMeasure(rng.normal(size=37))
        z = rng.normal(size=101) + 1j * rng.normal(size=101)
        np.testing.assert_array_equal(log_potential(mu, z, chunk=7), log_potential(mu, z))


class TestFubiniStudy:
    def test_values(self):
        assert fs_density(0.0) == pytest.approx(1 / math.pi)
        assert fs_density(1j) == pytest.approx(1 / (4 * math.pi))

    def test_total_mass(self):
        val, _ = integrate.quad(lambda r: 2 * math.pi * r * fs_density(r), 0, math.inf, epsabs=1e-12)
        assert val == pytest.approx(1.0, abs=1e-8)


def nquad_distance(atoms):
    """Independent oracle: scipy nquad over the plane in tan coordinates."""
    mu = AtomicMeasure(atoms)

    def f(t, s):
        x, y = math.tan(t), math.tan(s)
        z = complex(x, y)
        du = abs(float(log_potential(mu, z)) - float(sc_potential(z)))
        return du * fs_density(z) / (math.cos(t) ** 2 * math.cos(s) ** 2)

    pts = [math.atan(a) for a in atoms] + [math.atan(2), math.atan(-2)]
    val, _ = integrate.nquad(f, [[-math.pi / 2, math.pi / 2], [0, math.pi / 2]],
                             opts=[{"points": pts, "limit": 200, "epsabs": 1e-11}, {"points": [0.0], "limit": 200}])
    return 2 * val


class TestDistPotential:
    def test_identical_measures(self):
        for atoms in ([0.0], [-1.0, 1.0]):
            mu = AtomicMeasure(atoms)
            assert dist_potential(mu, AtomicMeasure(atoms)) == 0.0
        assert dist_potential(SEMICIRCLE, SEMICIRCLE) == 0.0

    @pytest.mark.parametrize("atoms", [[0.0], [-1.0, 1.0]])
    def test_against_independent_quadrature(self, atoms):
        ours = dist_potential(AtomicMeasure(atoms), SEMICIRCLE, tol=1e-7)
        assert ours == pytest.approx(nquad_distance(atoms), abs=1e-4)

    def test_symmetric(self):
        a, b = AtomicMeasure([0.0]), AtomicMeasure([1.0])
        assert dist_potential(a, b, tol=1e-6) == pytest.approx(dist_potential(b, a, tol=1e-6), rel=1e-12)

    def test_budget_exceeded(self):
        with pytest.raises(QuadratureError) as info:
            dist_potential_with_error(AtomicMeasure([0.0]), SEMICIRCLE, tol=1e-12, max_panels=200)
        assert info.value.achieved >= 0


class TestW1:
    def test_point_masses(self):
        assert w1_distance(AtomicMeasure([0.0]), AtomicMeasure([1.0])) == pytest.approx(1.0)

    @given(atoms_st)
    def test_self_distance(self, atoms):
        mu = AtomicMeasure(atoms)
        assert w1_distance(mu, AtomicMeasure(atoms)) == 0.0

    def test_against_quadrature(self):
        mu = AtomicMeasure([-1.0, 1.0])
        f = lambda x: abs(float(mu.cdf(x)) - sc_cdf(x))
        ref, _ = integrate.quad(f, -2, 2, points=[-1, 1], epsabs=1e-13)
        assert w1_distance(mu, SEMICIRCLE) == pytest.approx(ref, abs=1e-10)

    @given(atoms_st, atoms_st)
    def test_matches_sorted_matching(self, a, b):
        # equal sizes only: optimal coupling matches sorted atoms
        m = min(len(a), len(b))
        a, b = a[:m], b[:m]
        expect = float(np.mean(np.abs(np.sort(a) - np.sort(b))))
        assert w1_distance(AtomicMeasure(a), AtomicMeasure(b)) == pytest.approx(expect, abs=1e-12)


def brute_discrepancy(mu):
    """Max over all candidate interval endpoint pairs and closure types."""
    pts = list(mu.atoms) + [-2.0, 2.0]
    best = 0.0
    for lo in pts:
        for hi in pts:
            if lo > hi:
                continue
            for cl in (True, False):
                for ch in (True, False):
                    if lo == hi and not (cl and ch):
                        continue
                    q = IntervalQuery(lo, hi, cl, ch)
                    best = max(best, abs(interval_mass(mu, q) - interval_mass(SEMICIRCLE, q)))
    return best


class TestIntervalDiscrepancy:
    def test_single_atom(self):
        assert interval_discrepancy(AtomicMeasure([0.0])) == pytest.approx(1.0)

    @given(atoms_st)
    def test_atomic_self(self, atoms):
        assert interval_discrepancy(AtomicMeasure(atoms), AtomicMeasure(atoms)) == 0.0

    @settings(max_examples=60)
    @given(st.lists(st.floats(-2.5, 2.5, allow_nan=False), min_size=1, max_size=8))
    def test_matches_brute_force(self, atoms):
        mu = AtomicMeasure(atoms)
        assert interval_discrepancy(mu) == pytest.approx(brute_discrepancy(mu), abs=1e-12)

    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_quantile_atoms(self, n):
        mu = AtomicMeasure.semicircle_quantiles(n)
        d = interval_discrepancy(mu)
        assert d == pytest.approx(brute_discrepancy(mu), abs=1e-12)
        assert d <= 1.0 / n + 1e-12

    def test_interval_mass(self):
        mu = AtomicMeasure([-1.0, 0.0, 1.0])
        assert interval_mass(mu, IntervalQuery(-1, 1)) == 1.0
        assert interval_mass(mu, IntervalQuery(-1, 1, False, False)) == pytest.approx(1 / 3)
        assert interval_mass(SEMICIRCLE, IntervalQuery(-2, 2)) == 1.0


class TestGapAndMass:
    def test_grid(self):
        g = chebyshev_grid(17)
        assert g[0] == -2.0 and g[-1] == 2.0
        assert np.all(np.diff(g) > 0)

    def test_gap_far_atoms(self):
        # log|x - 5| - (x^2 - 2)/4 peaks where x^2 - 5x - 2 = 0
        x = (5 - math.sqrt(33)) / 2
        peak = math.log(5 - x) - (x * x - 2) / 4
        gap = potential_gap(AtomicMeasure([5.0]))
        assert gap == pytest.approx(peak, abs=1e-6)
        assert gap > math.log(7) - 0.5

    def test_gap_atom_inside(self):
        gap = potential_gap(AtomicMeasure([0.0]))
        assert math.isfinite(gap)

    def test_gap_decreases_with_n(self):
        g50 = potential_gap(AtomicMeasure.semicircle_quantiles(50))
        g400 = potential_gap(AtomicMeasure.semicircle_quantiles(400))
        assert 0 < g400 < g50

    def test_gap_grid_outside_rejected(self):
        with pytest.raises(ValueError):
            potential_gap(AtomicMeasure([0.0]), [0.0, 2.5])

    def test_mass_outside(self):
        assert mass_outside(AtomicMeasure([-3, 0, 3]), -2, 2) == pytest.approx(2 / 3)
        assert mass_outside(AtomicMeasure([0.0]), -2, 2) == 0.0

    def test_quantile_edge_mass(self):
        eps = 0.1
        eta = eps ** 0.8
        edge = mass_outside(AtomicMeasure.semicircle_quantiles(100), -2 + eta, 2 - eta)
        # semicircle mass of the two edge strips
        strips = 2 * (1 - sc_cdf(2 - eta))
        assert edge == pytest.approx(strips, abs=1 / 100 + 1e-12)
