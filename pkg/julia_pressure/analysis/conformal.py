"""
Truncated Patterson-Sullivan measures.

The atom at a node x of level n of the backward tree of z carries the weight
b_n e^{-n p} |(f^n)'(x)|^{-t}, nodes in W are dropped, and the sum is
normalised by the same truncated sum taken over nodes outside the reference
region V. With W = V the measure is a probability measure; for W inside V
the total mass is at least 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from julia_pressure.analysis.pressure import hidden_tree_pressure
from julia_pressure.errors import (
    MapNotExceptional,
    NotSpecial,
    PressureGapTooSmall,
    RegionTouchesExcluded,
    UnsafeBasepoint,
)
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import is_safe_point, julia_sample_array, make_rng
from julia_pressure.orbits.tree import DEFAULT_LEAF_BUDGET, TreeLevel, iterate_levels
from julia_pressure.sphere.point import SpherePoint, as_complex, chordal_distance, is_infinite
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

MIN_PRESSURE_GAP = 0.01


@dataclass
class AtomicMeasure:
    """Weighted point masses; weights are normalised by exp(log_normalizer)."""

    points: np.ndarray
    weights: np.ndarray
    levels: np.ndarray
    positions: np.ndarray
    log_normalizer: float
    params: Dict = field(default_factory=dict)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def mass(self, region: Region) -> float:
        return float(np.sum(self.weights[region.contains_array(self.points)]))

    def punctured_ball_mass(self, center, radius: float, inner_radius: float) -> float:
        """Mass of B(center, radius) minus B(center, inner_radius)."""
        dist = chordal_distance(self.points, as_complex(center))
        inside = (dist <= radius) & (dist > inner_radius)
        return float(np.sum(self.weights[inside]))

    def keys(self) -> List[tuple]:
        return list(zip(self.levels.tolist(), self.positions.tolist()))

    def rows(self):
        return [(p.real, p.imag, float(w), int(n)) for p, w, n in zip(self.points, self.weights, self.levels)]


def b_sequence(n: np.ndarray, choice: str = "one", gamma: float = 1.0) -> np.ndarray:
    """log b_n for b_n = 1 or b_n = (n + 1)^gamma; both have b_n / b_{n+1} -> 1."""
    if choice == "one":
        return np.zeros(np.shape(n))
    if choice == "power":
        return gamma * np.log(np.asarray(n, dtype=float) + 1.0)
    raise ValueError(f"Unknown b_choice: {choice}")


def collect_tree(fmap: RationalMap, z, depth: int, V: Region, metric: str = "auto", workers: int = 1,
                 leaf_budget: int = DEFAULT_LEAF_BUDGET) -> List[TreeLevel]:
    """All levels 0..depth of the terminal-exclusion tree of z with respect to V."""
    report = is_safe_point(fmap, z, horizon=max(depth, 1))
    if not report.safe:
        raise UnsafeBasepoint(f"basepoint {as_complex(z)} is not safe", report)
    return list(iterate_levels(fmap, z, depth, V, False, metric, workers, leaf_budget))


def measure_from_levels(levels: Sequence[TreeLevel], t: float, p: float, W: Region, depth: int,
                        b_choice: str = "one", gamma: float = 1.0) -> AtomicMeasure:
    """
    Build the measure from precomputed levels truncated at `depth`.

    The levels' `excluded` flags mark the reference region V; W must lie in V.
    """
    pts, logw, lev, pos, in_v = [], [], [], [], []
    for level in levels[1:depth + 1]:
        n = level.n
        pts.append(level.points)
        logw.append(b_sequence(np.array(n), b_choice, gamma) - n * p - t * level.log_deriv)
        lev.append(np.full(level.points.size, n))
        pos.append(np.arange(level.points.size))
        in_v.append(level.excluded)
    points = np.concatenate(pts)
    log_terms = np.concatenate(logw)
    levels_arr = np.concatenate(lev)
    positions = np.concatenate(pos)
    in_V = np.concatenate(in_v)
    log_M = float(logsumexp(log_terms[~in_V]))
    keep = ~W.contains_array(points)
    weights = np.exp(log_terms[keep] - log_M)
    return AtomicMeasure(
        points=points[keep],
        weights=weights,
        levels=levels_arr[keep],
        positions=positions[keep],
        log_normalizer=log_M,
        params={"t": t, "p": p, "depth": depth, "W": W.to_json(), "b_choice": b_choice, "gamma": gamma},
    )


def patterson_sullivan(fmap: RationalMap, z, t: float, p: float, W: Region, V: Region, depth: int,
                       b_choice: str = "one", gamma: float = 1.0, hidden: Optional[float] = None,
                       metric: str = "auto", workers: int = 1,
                       leaf_budget: int = DEFAULT_LEAF_BUDGET) -> AtomicMeasure:
    """
    Truncated Patterson-Sullivan measure mu_{t,W,p} at depth `depth`.

    Args:
        fmap: The map
        z: Safe basepoint outside V
        t: Inverse temperature
        p: Exponent, above the hidden pressure
        W: Excluded region (inside V)
        V: Reference region for the normaliser
        depth: Truncation depth
        b_choice: "one" or "power"
        gamma: Exponent of the power choice
        hidden: Hidden pressure estimate used for the gap check

    Returns:
        AtomicMeasure

    Raises:
        PressureGapTooSmall: p - hidden < 0.01
    """
    if hidden is not None and p - hidden < MIN_PRESSURE_GAP:
        raise PressureGapTooSmall(p - hidden)
    if not W.is_subset_of(V):
        logger.warning("W is not contained in V; total mass may fall below 1")
    levels = collect_tree(fmap, z, depth, V, metric, workers, leaf_budget)
    measure = measure_from_levels(levels, t, p, W, depth, b_choice, gamma)
    measure.params["metric"] = fmap.resolve_metric(metric)
    logger.debug(f"measure t={t} p={p:.4f} depth={depth}: {measure.points.size} atoms, "
                 f"mass {measure.total_mass:.6f}")
    return measure


def mass_bounds_check(measures: Sequence[AtomicMeasure], W_family: Sequence[Region]) -> Dict:
    """
    Mass >= 1 for every W, growth of C(W) as W shrinks, and restriction identity.

    Args:
        measures: Measures sharing (t, p, z, depth, V), ordered by shrinking W
        W_family: The matching W regions

    Returns:
        Report dictionary
    """
    masses = [m.total_mass for m in measures]
    report = {
        "masses": masses,
        "at_least_one": bool(all(mass >= 1.0 - 1e-9 for mass in masses)),
        "non_decreasing": bool(all(b >= a - 1e-12 for a, b in zip(masses, masses[1:]))),
        "growth": [b / a for a, b in zip(masses, masses[1:])],
    }
    restriction = True
    for (outer, W_outer), inner in zip(zip(measures, W_family), measures[1:]):
        outside = ~W_outer.contains_array(inner.points)
        inner_keys = dict(zip(zip(inner.levels[outside].tolist(), inner.positions[outside].tolist()),
                              inner.weights[outside]))
        outer_keys = dict(zip(outer.keys(), outer.weights))
        if set(inner_keys) != set(outer_keys):
            restriction = False
            break
        if any(abs(inner_keys[k] - outer_keys[k]) > 1e-12 * max(1.0, outer_keys[k]) for k in outer_keys):
            restriction = False
            break
    report["restriction_identity"] = restriction
    return report


# ----------------------------------------------------------------------
# special sets and the conformality defect


def _disk_samples(region: Region) -> np.ndarray:
    samples = []
    angles = np.exp(2j * np.pi * np.arange(16) / 16)
    for c, r in region.balls:
        fractions = np.array([0.0, 0.33, 0.66, 0.95])
        if is_infinite(c):
            rho = fractions * r / 2.0
            ring = (rho[:, None] * angles[None, :]).reshape(-1)
            with np.errstate(divide="ignore"):
                pts = np.where(ring == 0, complex(np.inf, 0.0), 1.0 / np.where(ring == 0, 1.0, ring))
        else:
            rho = fractions * r * (1.0 + abs(c) ** 2) / 2.0
            pts = c + (rho[:, None] * angles[None, :]).reshape(-1)
        samples.append(pts)
    pts = np.concatenate(samples) if samples else np.zeros(0, dtype=complex)
    return pts[region.contains_array(pts)]


def check_special(fmap: RationalMap, A: Region, W: Optional[Region] = None) -> None:
    """
    Verify A avoids Crit, W and f^-1(W), and that f is injective on A.

    Injectivity is tested on sample points y of A: of the d preimages of
    f(y), exactly one may lie in A.

    Raises:
        RegionTouchesExcluded: A meets Crit, W or f^-1(W)
        NotSpecial: two preimages of some f(y) lie in A
    """
    W = W or Region.empty()
    if np.any(A.contains_array(fmap.critical_array)):
        raise RegionTouchesExcluded("test region contains a critical point")
    if not W.is_empty and not A.disjoint_from(W):
        raise RegionTouchesExcluded("test region meets W")
    samples = _disk_samples(A)
    images = fmap.evaluate_array(samples)
    if not W.is_empty and np.any(W.contains_array(images)):
        raise RegionTouchesExcluded("test region meets f^-1(W)")
    preimages = fmap.preimages_array(images, check=False)
    hits = np.sum(A.contains_array(preimages), axis=1)
    if np.any(hits > 1):
        raise NotSpecial("f is not injective on the test region")


@dataclass
class DefectReport:
    defect: float
    image_mass: float
    jacobian_integral: float

    def to_json(self):
        return {"defect": self.defect, "image_mass": self.image_mass,
                "jacobian_integral": self.jacobian_integral}


def conformality_defect(measure: AtomicMeasure, fmap: RationalMap, t: float, hidden: float, A: Region,
                        W: Optional[Region] = None, metric: str = "auto") -> DefectReport:
    """
    |mu(f(A)) - sum over atoms x in A of w_x e^{hidden} |f'(x)|^t|.

    Atom y counts towards f(A) when one of its preimages lies in A.

    Raises:
        RegionTouchesExcluded, NotSpecial: A is not an admissible special set
    """
    check_special(fmap, A, W)
    log_w = np.log(measure.weights)
    pre = fmap.preimages_array(measure.points, check=False)
    in_image = np.any(A.contains_array(pre), axis=1)
    lhs = float(np.exp(logsumexp(log_w[in_image]))) if np.any(in_image) else 0.0
    in_A = A.contains_array(measure.points)
    if np.any(in_A):
        ld = fmap.log_derivative_array(measure.points[in_A], metric)
        rhs = float(np.exp(logsumexp(log_w[in_A] + hidden + t * ld)))
    else:
        rhs = 0.0
    return DefectReport(abs(lhs - rhs), lhs, rhs)


def defect_sweep(fmap: RationalMap, z, t: float, A: Region, W: Region, V: Region, hidden: float,
                 p_values: Sequence[float], depths: Sequence[int], metric: str = "auto") -> List[tuple]:
    """Rows (p, depth, defect) over a grid of exponents and depths."""
    check_special(fmap, A, W)
    levels = collect_tree(fmap, z, max(depths), V, metric)
    rows = []
    for p in p_values:
        for depth in depths:
            measure = measure_from_levels(levels, t, p, W, depth)
            rows.append((float(p), int(depth), conformality_defect(measure, fmap, t, hidden, A, W, metric).defect))
    return rows


def random_special_disks(fmap: RationalMap, count: int, radius: float, seed: int, start,
                         avoid: Optional[Region] = None, W: Optional[Region] = None,
                         attempts: int = 200) -> List[Region]:
    """
    Disks of the given chordal radius centred on Julia-set samples that pass check_special.

    Args:
        fmap: The map
        count: Number of disks wanted
        radius: Chordal radius
        seed: Sampling seed
        start: A point of J
        avoid: Centres must lie outside this region
        W: Excluded region for the admissibility check
        attempts: Number of candidate centres

    Returns:
        Up to `count` special disks
    """
    avoid = avoid or Region.empty()
    centers = julia_sample_array(fmap, start, attempts, seed)
    order = make_rng(seed + 1).permutation(attempts)
    disks = []
    for c in centers[order]:
        if avoid.contains(c):
            continue
        disk = Region.around([c], radius)
        try:
            check_special(fmap, disk, W)
        except (NotSpecial, RegionTouchesExcluded):
            continue
        disks.append(disk)
        if len(disks) == count:
            break
    return disks


# ----------------------------------------------------------------------
# blow-up near the exceptional set


def blowup_ratio(fmap: RationalMap, z, t: float, sigma, radius: float, inner_radius: float,
                 depth_lo: int, depth_hi: int, gap: float = 0.05, ball_radius: float = 0.1,
                 center=None, hidden: Optional[float] = None, metric: str = "auto",
                 workers: int = 1) -> Dict:
    """
    Growth of the punctured-ball mass near an exceptional cycle from depth_lo to depth_hi.

    Uses p = hidden + gap, W = B(Σ, inner_radius) and V = B(Σ, radius). Past
    the phase transition the mass diverges with depth; before it, it settles.
    Near a cycle of Lyapunov exponent χ the depth-n tree reaches no closer
    than about ball_radius·e^{-nχ}, so an inner radius above that resolution
    caps the growth; such reports carry inner_resolved = False.

    Returns:
        Report with both masses, their ratio and the resolution at depth_hi

    Raises:
        MapNotExceptional: Σ is empty and no center is given
    """
    if center is None:
        if sigma.is_empty:
            raise MapNotExceptional("blow-up check needs an exceptional point")
        periodic = [(root.exponent, pt) for pt, root in zip(sigma.points, sigma.cycle_roots)
                    if root.contains(pt)]
        center = max(periodic, key=lambda item: item[0])[1]
    V = Region.around(sigma.points, radius) if not sigma.is_empty else Region.empty()
    W = Region.around(sigma.points, inner_radius) if not sigma.is_empty else Region.empty()
    if gap < MIN_PRESSURE_GAP:
        raise PressureGapTooSmall(gap)
    if hidden is None:
        hidden = hidden_tree_pressure(fmap, z, t, V, depth_hi, metric=metric, workers=workers).value
    p = hidden + gap
    levels = collect_tree(fmap, z, depth_hi, V, metric, workers)
    lo = measure_from_levels(levels, t, p, W, depth_lo).punctured_ball_mass(center, ball_radius, inner_radius)
    hi = measure_from_levels(levels, t, p, W, depth_hi).punctured_ball_mass(center, ball_radius, inner_radius)
    ratio = hi / lo if lo > 0 else float("inf")
    resolution = _resolution(sigma, center, ball_radius, depth_hi)
    resolved = resolution is None or inner_radius <= resolution
    if not resolved:
        logger.warning(f"inner radius {inner_radius:.3g} exceeds the depth-{depth_hi} resolution "
                       f"{resolution:.3g}; the ratio is capped")
    logger.info(f"blow-up t={t}: mass {lo:.4g} at depth {depth_lo}, {hi:.4g} at depth {depth_hi}")
    return {"t": t, "p": p, "hidden": hidden, "center": SpherePoint.from_complex(as_complex(center)).to_json(),
            "ball_radius": ball_radius, "inner_radius": inner_radius, "depth_lo": depth_lo,
            "depth_hi": depth_hi, "mass_lo": lo, "mass_hi": hi, "ratio": ratio,
            "resolution": resolution, "inner_resolved": resolved}


def _resolution(sigma, center, ball_radius: float, depth: int) -> Optional[float]:
    """ball_radius·e^{-depth·χ} for the expanding cycle of Σ through center, if there is one."""
    for root in sigma.cycle_roots:
        if root.contains(center) and root.exponent > 0:
            return float(ball_radius * np.exp(-depth * root.exponent))
    return None
