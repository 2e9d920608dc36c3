"""
Tests for sphere arithmetic: points, roots, rational maps and families.
"""

import numpy as np
import pytest

from julia_pressure.errors import ConfigError, NonConvergence
from julia_pressure.orbits.periodic import find_periodic_orbits
from julia_pressure.sphere import rational_map
from julia_pressure.sphere.families import NamedFamily, build_family, chebyshev_coefficients
from julia_pressure.sphere.point import INF, SpherePoint, chordal_distance, set_point_tolerance
from julia_pressure.sphere.rational_map import RationalMap
from julia_pressure.sphere.roots import cluster_roots, durand_kerner, quadratic_roots


def test_chordal_distance_basics():
    assert chordal_distance(0.0, INF) == pytest.approx(2.0)
    assert chordal_distance(INF, INF) == pytest.approx(0.0)
    assert chordal_distance(1.0, -1.0) == pytest.approx(2.0)
    assert chordal_distance(1.0, 1j) == pytest.approx(np.sqrt(2.0))
    a, b = 0.3 + 2.0j, -5.0 + 0.1j
    assert chordal_distance(a, b) == pytest.approx(chordal_distance(b, a))
    # large values use the 1/z chart
    assert chordal_distance(1e200, INF) == pytest.approx(0.0, abs=1e-12)


def test_sphere_point_equality_and_json():
    p = SpherePoint.from_complex(1.0 + 1e-12j)
    assert p == SpherePoint.from_complex(1.0)
    assert not p.close_to(1.1)
    assert SpherePoint.from_complex(complex(np.inf, 0)).infinite
    assert SpherePoint.infinity().to_json() == "inf"
    assert SpherePoint(2.0).to_json() == [2.0, 0.0]
    with pytest.raises(ValueError):
        SpherePoint(complex(np.nan, 0.0))


def test_point_tolerance_is_configurable():
    try:
        set_point_tolerance(0.2)
        assert SpherePoint(1.0) == SpherePoint(1.05)
    finally:
        set_point_tolerance(1e-9)
    assert SpherePoint(1.0) != SpherePoint(1.05)
    with pytest.raises(ValueError):
        set_point_tolerance(0.0)


def test_quadratic_roots_without_cancellation():
    r1, r2 = quadratic_roots(np.array([1e-12]), np.array([1.0]), np.array([1.0]))
    assert abs(r1[0] * r2[0] - 1e-12) < 1e-24
    assert abs(r1[0] + r2[0] + 1.0) < 1e-12


def test_durand_kerner_cubic():
    # (z - 1)(z - 2)(z + 3) = z^3 - 7z + 6
    roots = durand_kerner(np.array([[6.0, -7.0, 0.0, 1.0]]))[0]
    assert sorted(roots.real) == pytest.approx([-3.0, 1.0, 2.0])


def test_preimage_residual_check_raises(monkeypatch):
    cube = NamedFamily.power(3).resolved
    w = np.array([0.5 + 0.2j])
    assert cube.preimages_array(w).shape == (1, 3)
    # durand_kerner returns its last iterate; the residual check sits in preimages_array
    monkeypatch.setattr(rational_map, "newton_polish", lambda coeffs, roots: roots + 1e-3)
    with pytest.raises(NonConvergence):
        cube.preimages_array(w)
    assert cube.preimages_array(w, check=False).shape == (1, 3)


def test_cluster_roots_groups_double_root():
    clusters = cluster_roots(np.array([1.0 + 1e-9, 1.0 - 1e-9, 3.0]))
    assert sorted(m for _, m in clusters) == [1, 2]


def test_evaluate_handles_infinity(chebyshev, lambda_map):
    assert chebyshev.evaluate(0.0) == SpherePoint(-2.0)
    assert chebyshev.evaluate(SpherePoint.infinity()).infinite
    assert lambda_map.evaluate(SpherePoint.infinity()) == SpherePoint(0.0)
    assert lambda_map.evaluate(0.5).infinite
    assert lambda_map.evaluate(1.0) == SpherePoint(1.0)


def test_iterate_orbit(chebyshev):
    orbit = chebyshev.iterate(0.0, 3)
    assert [p.to_complex().real for p in orbit] == pytest.approx([0.0, -2.0, 2.0, 2.0])


def test_log_derivative_values(square, chebyshev):
    assert square.log_derivative(1.0) == pytest.approx(np.log(2.0))
    assert square.log_derivative(1.0, metric="spherical") == pytest.approx(np.log(2.0))
    assert chebyshev.log_derivative(2.0) == pytest.approx(np.log(4.0))
    assert chebyshev.log_derivative(0.0) == -np.inf


def test_critical_points_count(square, chebyshev, basilica, lambda_map):
    for fmap in (square, chebyshev, basilica, lambda_map):
        total = sum(m - 1 for _, m in fmap.critical_points())
        assert total == 2 * fmap.degree - 2
    points = [p for p, _ in lambda_map.critical_points()]
    assert any(p.infinite for p in points)
    assert any(p == SpherePoint(0.5) for p in points)


def test_local_degree_iterate(chebyshev, lambda_map):
    assert chebyshev.local_degree(0.0) == 2
    assert chebyshev.local_degree(1.0) == 1
    assert chebyshev.local_degree_iterate(0.0, 2) == 2
    # 1/2 -> inf -> 0: both 1/2 and inf are critical
    assert lambda_map.local_degree_iterate(0.5, 3) == 4


def test_preimage_round_trip(chebyshev, lambda_map):
    rng = np.random.default_rng(3)
    w = rng.normal(size=50) * 3 + 1j * rng.normal(size=50) * 3
    for fmap in (chebyshev, lambda_map):
        pre = fmap.preimages_array(w)
        assert pre.shape == (50, 2)
        images = fmap.evaluate_array(pre)
        assert np.max(chordal_distance(images, w[:, None])) < 1e-10


def test_preimages_of_infinity(chebyshev, lambda_map):
    assert all(p.infinite for p in chebyshev.preimages(SpherePoint.infinity()))
    assert all(p == SpherePoint(0.5) for p in lambda_map.preimages(SpherePoint.infinity()))
    assert all(p.infinite for p in lambda_map.preimages(0.0))


def test_chart_derivative_multiplier(chebyshev, square):
    assert chebyshev.chart_derivative(2.0) == pytest.approx(4.0)
    assert chebyshev.chart_derivative(-1.0) == pytest.approx(-2.0)
    # superattracting fixed point at infinity
    assert abs(square.chart_derivative(SpherePoint.infinity())) < 1e-12


def test_coprime_and_degree_checks():
    with pytest.raises(ConfigError):
        RationalMap([-1.0, 0.0, 1.0], [-1.0, 1.0])
    with pytest.raises(ConfigError):
        RationalMap([0.0, 1.0], [1.0])
    with pytest.raises(ConfigError):
        RationalMap([1.0, 0.0, 1.0], [0.0])


def test_chebyshev_coefficients():
    assert np.allclose(chebyshev_coefficients(2), [-2.0, 0.0, 1.0])
    assert np.allclose(chebyshev_coefficients(3), [0.0, -3.0, 0.0, 1.0])


def test_families():
    assert NamedFamily.power(3).resolved.degree == 3
    assert NamedFamily.chebyshev(2).has_closed_form
    assert not NamedFamily.quadratic(-1.0).has_closed_form
    fmap = build_family("lambda", lam=4.0).resolved
    assert fmap.evaluate(0.0) == SpherePoint(1.0)
    with pytest.raises(ConfigError):
        build_family("mandelbrot")
    with pytest.raises(ConfigError):
        NamedFamily.lambda_family(0.0)


def _log_uniform_points(rng, count):
    modulus = 10.0 ** rng.uniform(-3.0, 3.0, count)
    return modulus * np.exp(2j * np.pi * rng.random(count))


@pytest.mark.slow
def test_chart_switch_matches_direct_evaluation(chebyshev, lambda_map):
    z = _log_uniform_points(np.random.default_rng(13), 10_000)
    for fmap in (chebyshev, lambda_map):
        direct = (np.polynomial.polynomial.polyval(z, fmap.numerator)
                  / np.polynomial.polynomial.polyval(z, fmap.denominator))
        assert np.max(chordal_distance(fmap.evaluate_array(z), direct)) < 1e-9


@pytest.mark.slow
def test_planar_log_derivative_matches_quotient_rule(chebyshev, lambda_map):
    z = _log_uniform_points(np.random.default_rng(17), 10_000)
    P = np.polynomial.polynomial
    for fmap in (chebyshev, lambda_map):
        num, den = fmap.numerator, fmap.denominator
        wron = P.polyval(z, P.polyder(num)) * P.polyval(z, den) - P.polyval(z, num) * P.polyval(z, P.polyder(den))
        direct = np.log(np.abs(wron)) - 2.0 * np.log(np.abs(P.polyval(z, den)))
        assert np.allclose(fmap.log_derivative_array(z, "planar"), direct, rtol=0.0, atol=1e-8)
        # the spherical factors telescope along f
        fz = fmap.evaluate_array(z)
        spherical = fmap.log_derivative_array(z, "spherical")
        assert np.allclose(spherical, direct + np.log1p(np.abs(z) ** 2) - np.log1p(np.abs(fz) ** 2),
                           rtol=0.0, atol=1e-8)


@pytest.mark.slow
def test_cycle_log_derivatives_sum_to_multiplier(chebyshev, lambda_map):
    for fmap in (chebyshev, lambda_map):
        for orbit in find_periodic_orbits(fmap, 3):
            if orbit.classification == "attracting":
                continue
            total = float(np.sum(fmap.log_derivative_array(orbit.point_array(), "spherical")))
            assert total == pytest.approx(np.log(abs(orbit.multiplier)), abs=1e-8)
