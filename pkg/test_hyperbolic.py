"""
Tests for Pliss times, chi_plus, shadowing and periodic points near critical preimages.
"""

import numpy as np
import pytest

from julia_pressure.analysis.exceptional import detect_exceptional
from julia_pressure.analysis.hyperbolic import (
    analyze_orbit,
    chi_plus,
    gap_property_check,
    periodic_near_critical,
    pliss_times,
    pliss_times_bruteforce,
    shadow_periodic,
)
from julia_pressure.errors import EmptySample, NotAnExceptionalPreimage, OrbitHitsCritical
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import julia_sample_array, make_rng
from julia_pressure.sphere.families import NamedFamily

LOG2 = np.log(2.0)
CHEB_BASE = 2.0 * np.cos(1.0)


def test_square_pliss_times(square):
    assert pliss_times(square, 1.0, 20, 0.5) == list(range(1, 21))
    assert pliss_times(square, 1.0, 20, LOG2) == list(range(1, 21))
    assert pliss_times(square, 1.0, 20, 1.0) == []


def test_scan_agrees_with_bruteforce(chebyshev):
    for chi in (0.2, LOG2, 0.9):
        assert pliss_times(chebyshev, 0.3, 25, chi) == pliss_times_bruteforce(chebyshev, 0.3, 25, chi)


def test_orbit_through_critical_point(chebyshev):
    with pytest.raises(OrbitHitsCritical) as info:
        pliss_times(chebyshev, np.sqrt(2.0), 5, 0.1)
    assert info.value.step == 1


def test_orbit_analysis_itinerary(chebyshev):
    analysis = analyze_orbit(chebyshev, 1.0, 6, V=Region.around([2.0], 0.1))
    assert analysis.first_entry() is None
    assert analysis.exponent(1) == pytest.approx(LOG2)
    entering = analyze_orbit(chebyshev, np.sqrt(3.0), 4, V=Region.around([1.0], 0.05))
    assert entering.first_entry() == 1


def test_chi_plus_on_unit_circle(square):
    estimate = chi_plus(square, None, 10, 100, 1.0, seed=3)
    assert estimate.value == pytest.approx(LOG2)
    assert estimate.samples == 100
    assert estimate.to_json()["lower_estimate"]


def test_gap_property_check(chebyshev):
    sigma = detect_exceptional(chebyshev)
    report = gap_property_check(chebyshev, sigma, 0.1, LOG2 + 0.1, CHEB_BASE, depth=10, sample_size=200, seed=2)
    assert report["reading"] == "start_point"
    assert report["segments"] == report["starting_outside"] > 0
    assert report["avoiding"] <= report["segments"]
    assert report["max_exponent"] <= report["bound"]
    assert report["ok"]


def test_gap_property_whole_segments(chebyshev):
    sigma = detect_exceptional(chebyshev)
    report = gap_property_check(chebyshev, sigma, 0.01, LOG2 + 0.3, CHEB_BASE, depth=10, sample_size=300,
                                seed=2, whole_segment=True)
    assert report["reading"] == "whole_segment"
    assert 0 < report["segments"] == report["avoiding"] <= report["starting_outside"]
    assert report["ok"]


def test_no_segment_avoids_wide_chebyshev_region(chebyshev):
    # outside B({±2}, 0.3) the only surviving orbit is the fixed point -1
    sigma = detect_exceptional(chebyshev)
    with pytest.raises(EmptySample):
        gap_property_check(chebyshev, sigma, 0.3, LOG2 + 0.1, CHEB_BASE, depth=20, sample_size=200,
                           seed=2, whole_segment=True)


def test_shadow_of_periodic_orbit(square):
    x = np.exp(2j * np.pi / 7.0)
    result = shadow_periodic(square, x, 9, None, 0.05, LOG2)
    assert result.found
    assert result.orbit.period == 3
    assert result.pliss_time == 9
    assert all(dist <= bound for _, dist, bound in result.table)


def test_shadow_reasons(square):
    x = np.exp(2j * np.pi / 7.0)
    blocked = shadow_periodic(square, x, 9, Region.around([x ** 2], 0.01), 0.05, LOG2)
    assert not blocked.found
    assert "excluded region" in blocked.reason
    slow = shadow_periodic(square, x, 9, None, 0.05, 2.0)
    assert not slow.found
    assert "below" in slow.reason


def test_periodic_points_near_chebyshev_critical_point(chebyshev):
    sigma = detect_exceptional(chebyshev)
    records = periodic_near_critical(chebyshev, sigma, 0.0, [1, 2, 3])
    assert [r.n for r in records] == [1, 2, 3]
    found = [r for r in records if r.error is None]
    assert found
    for record in found:
        assert record.distance <= 4.0 * record.radius
        assert record.exponent == pytest.approx(LOG2, abs=1e-6)


def test_periodic_near_critical_rejects_other_points(chebyshev):
    sigma = detect_exceptional(chebyshev)
    with pytest.raises(NotAnExceptionalPreimage):
        periodic_near_critical(chebyshev, sigma, 1.0, [1])


@pytest.mark.slow
def test_gap_property_on_thousand_segments(chebyshev):
    sigma = detect_exceptional(chebyshev)
    report = gap_property_check(chebyshev, sigma, 0.3, LOG2 + 0.1, CHEB_BASE, depth=20, sample_size=4000,
                                seed=5)
    assert report["segments"] >= 1000
    assert report["max_exponent"] <= LOG2 + 0.1
    assert report["ok"]


@pytest.mark.slow
def test_scan_agrees_with_bruteforce_on_random_triples(square, chebyshev, basilica):
    cube = NamedFamily.power(3).resolved
    maps = [(square, 1.0), (chebyshev, CHEB_BASE), (basilica, (1.0 + np.sqrt(5.0)) / 2.0), (cube, 1.0)]
    rng = make_rng(11)
    pools = [julia_sample_array(fmap, start, 100, seed=k) for k, (fmap, start) in enumerate(maps)]
    for _ in range(100):
        k = int(rng.integers(len(maps)))
        fmap = maps[k][0]
        x = pools[k][int(rng.integers(100))]
        chi = float(rng.uniform(0.0, 1.5))
        assert pliss_times(fmap, x, 50, chi) == pliss_times_bruteforce(fmap, x, 50, chi)


@pytest.mark.slow
def test_chebyshev_shadowing_success_rate(chebyshev):
    sigma = detect_exceptional(chebyshev)
    V = Region.around(sigma.points, 0.05)
    eps, n = 0.05, 16
    admissible = []
    for x in julia_sample_array(chebyshev, CHEB_BASE, 2000, seed=5):
        analysis = analyze_orbit(chebyshev, x, n, V)
        if analysis.first_entry() is None and analysis.exponent() >= LOG2 - eps:
            admissible.append(x)
        if len(admissible) == 10:
            break
    assert len(admissible) == 10
    successes = 0
    for x in admissible:
        result = shadow_periodic(chebyshev, x, n, V, eps, LOG2)
        if result.found and result.orbit.exponent >= LOG2 - 0.05:
            assert all(dist <= bound for _, dist, bound in result.table)
            successes += 1
    assert successes >= 8
