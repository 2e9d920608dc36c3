"""
Tests for regions, periodic orbits, Julia sampling and backward trees.
"""

import numpy as np
import pytest

from julia_pressure.errors import BudgetExceeded, ConfigError, UnsafeBasepoint
from julia_pressure.orbits import periodic
from julia_pressure.orbits.periodic import (
    classify_multiplier,
    compose_homogeneous,
    expected_cycle_count,
    find_periodic_orbits,
)
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import choose_basepoint, is_safe_point, julia_sample_array, make_rng
from julia_pressure.orbits.tree import backward_tree, iterate_levels
from julia_pressure.sphere.point import INF, SpherePoint


class TestRegion:

    def test_empty(self):
        region = Region.empty()
        assert region.is_empty
        assert not region.contains(0.0)
        assert np.all(np.isinf(region.distance_array(np.array([0.0, 1.0]))))

    def test_membership_on_the_sphere(self):
        region = Region.around([SpherePoint.infinity()], 0.1)
        assert region.contains(1e6)
        assert not region.contains(1.0)

    def test_subset_and_disjoint(self):
        outer = Region.around([2.0], 0.2)
        inner = outer.scaled(0.5)
        assert inner.is_subset_of(outer)
        assert not outer.is_subset_of(inner)
        assert outer.disjoint_from(Region.around([-2.0], 0.2))

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            Region.around([0.0], 0.0)


class TestPeriodicOrbits:

    def test_square_cycle_counts(self, square):
        catalog = find_periodic_orbits(square, 3)
        assert catalog.complete
        assert len(catalog.by_period(1)) == 3
        assert len(catalog.by_period(2)) == 1
        assert len(catalog.by_period(3)) == 2

    def test_square_fixed_points_classified(self, square):
        catalog = find_periodic_orbits(square, 1)
        classes = {str(o.points[0]): o.classification for o in catalog}
        assert classes["SpherePoint(inf)"] == "attracting"
        one = catalog.containing(1.0)
        assert one.classification == "expanding"
        assert one.multiplier == pytest.approx(2.0)

    def test_chebyshev_multipliers(self, chebyshev):
        catalog = find_periodic_orbits(chebyshev, 2)
        assert catalog.containing(2.0).multiplier == pytest.approx(4.0)
        assert catalog.containing(-1.0).multiplier == pytest.approx(-2.0)
        two_cycle = catalog.containing((np.sqrt(5.0) - 1.0) / 2.0)
        assert two_cycle.period == 2
        assert two_cycle.multiplier == pytest.approx(-4.0)
        assert two_cycle.exponent == pytest.approx(np.log(2.0))

    def test_lambda_fixed_point(self, lambda_map):
        catalog = find_periodic_orbits(lambda_map, 2)
        fixed = catalog.containing(1.0)
        assert fixed.period == 1
        assert fixed.multiplier == pytest.approx(-4.0)

    def test_composition_matches_iteration(self, basilica):
        Pn, Qn = compose_homogeneous(basilica, 3)
        z = np.array([0.3 + 0.2j, -0.7 + 0.1j])
        direct = basilica.iterate_array(z, 3)[-1]
        composed = np.polynomial.polynomial.polyval(z, Pn) / np.polynomial.polynomial.polyval(z, Qn)
        assert np.allclose(direct, composed)

    def test_period_bounds(self, square):
        with pytest.raises(ConfigError):
            find_periodic_orbits(square, 0)
        with pytest.raises(ConfigError):
            find_periodic_orbits(square, 13)

    def test_classify_multiplier(self):
        assert classify_multiplier(0.5) == "attracting"
        assert classify_multiplier(1.0) == "neutral"
        assert classify_multiplier(-3.0) == "expanding"

    def test_expected_cycle_count(self):
        counts = [expected_cycle_count(2, n) for n in range(1, 13)]
        assert counts == [3, 1, 2, 3, 6, 9, 18, 30, 56, 99, 186, 335]
        assert expected_cycle_count(3, 2) == 3

    def test_square_counts_through_period_eight(self, square):
        catalog = find_periodic_orbits(square, 8)
        assert catalog.complete
        assert catalog.missing == []
        for n in range(1, 9):
            assert len(catalog.by_period(n)) == expected_cycle_count(2, n)

    def test_short_count_marks_period_missing(self, square, monkeypatch):
        original = periodic._candidates_by_composition

        def truncated(fmap, n):
            roots = original(fmap, n)
            return roots[:1] if n == 3 else roots

        monkeypatch.setattr(periodic, "_candidates_by_composition", truncated)
        monkeypatch.setattr(periodic, "_candidates_by_pullback",
                            lambda fmap, catalog, n: np.zeros(0, dtype=complex))
        catalog = find_periodic_orbits(square, 3)
        assert not catalog.complete
        assert catalog.missing == [3]
        assert len(catalog.by_period(3)) < 2

    @pytest.mark.slow
    def test_chebyshev_through_period_twelve(self, chebyshev):
        catalog = find_periodic_orbits(chebyshev, 12)
        counts = [len(catalog.by_period(n)) for n in range(1, 13)]
        expected = [expected_cycle_count(2, n) for n in range(1, 13)]
        assert counts[:7] == expected[:7]
        for n, (found, wanted) in enumerate(zip(counts, expected), start=1):
            assert found <= wanted
            if found < wanted:
                assert n in catalog.missing
                assert not catalog.complete
        for orbit in catalog:
            finite = orbit.point_array()
            finite = finite[np.isfinite(finite.real)]
            assert np.all(np.abs(finite.imag) < 1e-6)
            assert np.all(np.abs(finite.real) <= 2.0 + 1e-6)
            if orbit.period > 1:
                assert abs(orbit.multiplier) == pytest.approx(2.0 ** orbit.period, rel=1e-6)


class TestSampling:

    def test_sample_is_deterministic(self, basilica):
        a = julia_sample_array(basilica, 1.618, 20, seed=5)
        b = julia_sample_array(basilica, 1.618, 20, seed=5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, julia_sample_array(basilica, 1.618, 20, seed=6))

    def test_square_sample_on_unit_circle(self, square):
        sample = julia_sample_array(square, 1.0, 50, seed=1)
        assert np.allclose(np.abs(sample), 1.0)

    def test_make_rng_keyed_by_seed(self):
        assert make_rng(3).integers(0, 1000) == make_rng(3).integers(0, 1000)

    def test_safe_point(self, square, chebyshev):
        assert is_safe_point(square, 1.0, horizon=20).safe
        report = is_safe_point(chebyshev, 2.0, horizon=5)
        assert report.on_critical_orbit
        assert not report.safe
        assert is_safe_point(square, 1.0, horizon=10, expanding_rate=1.5).expanding

    def test_safe_point_arguments(self, square):
        with pytest.raises(ValueError):
            is_safe_point(square, 1.0, horizon=0)
        with pytest.raises(ValueError):
            is_safe_point(square, 1.0, horizon=5, beta=1.5)

    def test_choose_basepoint_avoids_region(self, chebyshev):
        avoid = Region.around([2.0, -2.0], 0.1)
        z = choose_basepoint(chebyshev, 1.0, avoid=avoid, seed=3, horizon=10)
        assert not avoid.contains(z)
        assert -2.0 - 1e-9 <= z.to_complex().real <= 2.0 + 1e-9


class TestBackwardTree:

    def test_square_tree_sizes_and_derivatives(self, square):
        tree = backward_tree(square, 1.0, 6)
        assert tree.leaf_count == 64
        assert np.allclose(tree.log_deriv, 6 * np.log(2.0))
        assert np.allclose(np.abs(tree.points), 1.0)

    def test_levels_are_parent_major(self, chebyshev):
        levels = list(iterate_levels(chebyshev, 1.0, 3))
        assert [lvl.n for lvl in levels] == [0, 1, 2, 3]
        last = levels[-1]
        images = chebyshev.evaluate_array(last.points)
        assert np.allclose(images, levels[2].points[last.parents])

    def test_terminal_and_strict_exclusion(self, chebyshev):
        V = Region.around([2.0, -2.0], 0.2)
        terminal = backward_tree(chebyshev, 1.0, 6, exclude=V)
        strict = backward_tree(chebyshev, 1.0, 6, exclude=V, strict=True)
        assert terminal.leaf_count == 64
        assert np.any(terminal.excluded)
        assert strict.leaf_count < 64
        assert strict.pruned > 0
        assert not np.any(V.contains_array(strict.points))

    def test_paths_end_at_root(self, basilica):
        tree = backward_tree(basilica, 1.618, 4, record_paths=True, check_safe=False)
        assert tree.paths.shape == (16, 5)
        assert np.allclose(tree.paths[:, -1], 1.618)
        assert np.allclose(basilica.evaluate_array(tree.paths[:, 0]), tree.paths[:, 1])

    def test_budget(self, square):
        with pytest.raises(BudgetExceeded):
            backward_tree(square, 1.0, 10, leaf_budget=100)

    def test_unsafe_root(self, chebyshev):
        with pytest.raises(UnsafeBasepoint):
            backward_tree(chebyshev, 2.0, 4)
        with pytest.raises(UnsafeBasepoint):
            list(iterate_levels(chebyshev, 1.0, 2, exclude=Region.around([1.0], 0.1)))

    def test_infinity_root_preimages(self, square):
        levels = list(iterate_levels(square, INF, 1))
        assert np.all(np.isinf(levels[1].points.real))
