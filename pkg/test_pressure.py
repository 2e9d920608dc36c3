"""
Tests for tree pressure, hidden pressure, chi_sup and the phase transition.
"""

import numpy as np
import pytest

from julia_pressure.analysis.exceptional import ExceptionalSet, detect_exceptional
from julia_pressure.analysis.pressure import (
    PressureCurve,
    assemble_curve,
    chi_sup_estimate,
    collect_levels,
    hidden_tree_pressure,
    phase_transition,
    tree_pressure,
)
from julia_pressure.errors import EmptyTree, GridTooCoarse, UnsafeBasepoint
from julia_pressure.orbits.periodic import find_periodic_orbits
from julia_pressure.orbits.regions import Region
from julia_pressure.sphere.point import SpherePoint


def synthetic_curve(t, hidden, chi_sup, sigma_empty=False):
    t = np.asarray(t, dtype=float)
    hidden = np.asarray(hidden, dtype=float)
    return PressureCurve(
        t_grid=t,
        hidden=hidden,
        full=np.maximum(hidden, -t * chi_sup),
        tree=hidden,
        chi_sup=chi_sup,
        convergence=np.zeros(t.size),
        tree_convergence=np.zeros(t.size),
        basepoint=SpherePoint(1.0),
        exclusion=Region.empty(),
        depth=10,
        sigma_empty=sigma_empty,
    )


@pytest.mark.parametrize("t", [-2.0, 0.0, 0.5, 1.0, 2.0])
def test_square_tree_pressure_closed_form(square, t):
    estimate = tree_pressure(square, 1.0, t, 10)
    assert estimate.value == pytest.approx((1.0 - t) * np.log(2.0))
    assert estimate.convergence == pytest.approx(0.0, abs=1e-12)


def test_hidden_pressure_bounded_by_tree_pressure(chebyshev):
    V = Region.around([2.0, -2.0], 0.2)
    for t in (-1.0, 0.0, 1.0):
        hidden = hidden_tree_pressure(chebyshev, 1.0, t, V, 10).value
        full = tree_pressure(chebyshev, 1.0, t, 10).value
        assert hidden <= full + 1e-12
    assert hidden_tree_pressure(chebyshev, 1.0, 0.0, V, 10).value < np.log(2.0)


def test_strict_exclusion_never_exceeds_terminal(chebyshev):
    V = Region.around([2.0, -2.0], 0.2)
    terminal = hidden_tree_pressure(chebyshev, 1.0, 0.0, V, 10)
    strict = hidden_tree_pressure(chebyshev, 1.0, 0.0, V, 10, strict=True)
    assert strict.value <= terminal.value + 1e-12


def test_collect_levels_checks(square, chebyshev):
    with pytest.raises(ValueError):
        collect_levels(square, 1.0, 1)
    with pytest.raises(UnsafeBasepoint):
        collect_levels(chebyshev, 2.0, 6)
    # both preimages of i pruned at the first level
    V = Region.around([np.exp(0.25j * np.pi), -np.exp(0.25j * np.pi)], 0.1)
    with pytest.raises(EmptyTree):
        hidden_tree_pressure(square, 1j, 0.0, V, 4, strict=True)


def test_chi_sup_splits_exceptional_cycles(chebyshev):
    catalog = find_periodic_orbits(chebyshev, 3)
    sigma = detect_exceptional(chebyshev, catalog=catalog)
    chi = chi_sup_estimate(chebyshev, sigma, catalog)
    assert chi.value == pytest.approx(np.log(4.0))
    assert chi.sigma_exponents == pytest.approx([np.log(4.0)])
    assert chi.outside_sigma == pytest.approx(np.log(2.0))


def test_square_curve_has_no_transition(square):
    catalog = find_periodic_orbits(square, 3)
    sigma = ExceptionalSet()
    curve = assemble_curve(square, 1.0, np.linspace(-2.0, 2.0, 9), Region.empty(), 10, sigma, catalog)
    assert curve.t_minus is None
    assert np.allclose(curve.hidden, (1.0 - curve.t_grid) * np.log(2.0))
    assert np.allclose(curve.full, curve.hidden)
    assert curve.diagnostics["convex"]
    assert curve.diagnostics["hidden_le_full"]
    assert len(curve.rows()) == 9


def test_chebyshev_phase_transition_near_minus_one(chebyshev):
    catalog = find_periodic_orbits(chebyshev, 3)
    sigma = detect_exceptional(chebyshev, catalog=catalog)
    V = Region.around(sigma.points, 0.1)
    grid = np.round(np.arange(-2.0, 1.0001, 0.1), 10)
    curve = assemble_curve(chebyshev, 1.0, grid, V, 12, sigma, catalog)
    assert curve.chi_sup == pytest.approx(np.log(4.0))
    t_minus = phase_transition(curve, tol=1e-3)
    assert t_minus is not None
    assert t_minus == pytest.approx(-1.0, abs=0.2)
    # past the transition the full pressure follows the cycle line
    assert curve.full[0] == pytest.approx(2.0 * np.log(4.0))


def test_phase_transition_synthetic():
    t = np.linspace(-3.0, 1.0, 17)
    chi = np.log(4.0)
    hidden = (1.0 - t) * np.log(2.0)
    curve = synthetic_curve(t, hidden, chi)
    assert phase_transition(curve) == pytest.approx(-1.0, abs=1e-9)
    assert phase_transition(synthetic_curve(t, hidden, chi, sigma_empty=True)) is None


def test_phase_transition_rejects_split_gap_region():
    t = np.array([-3.0, -2.0, -1.0, 0.0, 1.0])
    hidden = np.array([0.0, 3.0, 0.0, 0.0, 0.0])
    with pytest.raises(GridTooCoarse):
        phase_transition(synthetic_curve(t, hidden, 1.0), tol=1e-3)


def test_grid_must_increase(square):
    with pytest.raises(ValueError):
        assemble_curve(square, 1.0, [0.0, 0.0], Region.empty(), 4, ExceptionalSet(),
                       find_periodic_orbits(square, 1))


CHEB_BASE = 2.0 * np.cos(1.0)
ACCEPTANCE_GRID = np.round(np.arange(-3.0, 2.0001, 0.25), 10)


def chebyshev_closed_form(t):
    return np.maximum((1.0 - t) * np.log(2.0), -2.0 * t * np.log(2.0))


@pytest.mark.slow
def test_chebyshev_tree_pressure_depth_sixteen(chebyshev):
    levels = collect_levels(chebyshev, CHEB_BASE, 16)
    values = np.array([levels.pressure(t, restricted=False).value for t in ACCEPTANCE_GRID])
    error = np.abs(values - chebyshev_closed_form(ACCEPTANCE_GRID))
    # at t = -1 both branches meet and the depth-16 sum carries a log(n)/n excess
    at_corner = ACCEPTANCE_GRID == -1.0
    assert np.max(error[~at_corner]) < 0.1
    assert error[at_corner][0] < 0.15
    assert values[ACCEPTANCE_GRID == -2.0][0] == pytest.approx(4.0 * np.log(2.0), abs=0.1)


@pytest.mark.slow
def test_chebyshev_hidden_pressure_depth_sixteen(chebyshev):
    sigma = detect_exceptional(chebyshev)
    V = Region.around(sigma.points, 0.2)
    assert hidden_tree_pressure(chebyshev, CHEB_BASE, -2.0, V, 16).value == pytest.approx(
        3.0 * np.log(2.0), abs=0.15)
    assert hidden_tree_pressure(chebyshev, CHEB_BASE, 1.0, V, 16).value == pytest.approx(0.0, abs=0.1)


@pytest.mark.slow
def test_phase_transition_on_acceptance_grid(chebyshev, square, basilica):
    catalog = find_periodic_orbits(chebyshev, 4)
    sigma = detect_exceptional(chebyshev, catalog=catalog)
    curve = assemble_curve(chebyshev, CHEB_BASE, ACCEPTANCE_GRID, Region.around(sigma.points, 0.1), 16,
                           sigma, catalog)
    assert -1.15 <= curve.t_minus <= -0.85
    assert curve.diagnostics["convex"]
    for fmap, z in ((square, 1.0), (basilica, (1.0 + np.sqrt(5.0)) / 2.0)):
        flat = assemble_curve(fmap, z, ACCEPTANCE_GRID, Region.empty(), 14, ExceptionalSet(),
                              find_periodic_orbits(fmap, 4))
        assert flat.t_minus is None


def test_basilica_stays_above_cycle_line(basilica):
    # every cycle of z^2 - 1 lies in |z| <= beta, so chi_sup is the exponent of beta
    beta = (1.0 + np.sqrt(5.0)) / 2.0
    catalog = find_periodic_orbits(basilica, 4)
    sigma = detect_exceptional(basilica, catalog=catalog)
    grid = np.linspace(-3.0, 2.0, 21)
    curve = assemble_curve(basilica, beta, grid, Region.empty(), 12, sigma, catalog)
    assert curve.chi_sup == pytest.approx(np.log(2.0 * beta))
    g = curve.hidden + curve.t_grid * curve.chi_sup
    assert np.all(g >= -1e-9)
    assert phase_transition(curve) is None
