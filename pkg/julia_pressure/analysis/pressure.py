"""
Tree pressure, hidden tree pressure and the variational pressure curve.

All branch sums are taken in log space with scipy.special.logsumexp. One
backward tree serves every t on the grid: the pressure at depth n is
(1/n) logsumexp(-t * log|(f^n)'|) over the admissible leaves, and the
convergence estimate is its change from depth n - 2.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from julia_pressure.errors import EmptySample, EmptyTree, GridTooCoarse, UnsafeBasepoint
from julia_pressure.orbits.periodic import PeriodicOrbit
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import is_safe_point
from julia_pressure.orbits.tree import DEFAULT_LEAF_BUDGET, iterate_levels
from julia_pressure.sphere.point import SpherePoint, as_complex
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

TRANSITION_TOL_FLOOR = 1e-3


@dataclass
class PressureEstimate:
    value: float
    convergence: float


@dataclass
class LevelSums:
    """Admissible log-derivatives of the last two tree levels used for pressure."""

    depth: int
    log_deriv: np.ndarray
    mask: np.ndarray
    log_deriv_prev: np.ndarray
    mask_prev: np.ndarray
    pruned: int = 0

    def pressure(self, t: float, restricted: bool = True) -> PressureEstimate:
        """Pressure at t from the depth-n and depth-(n-2) levels."""
        now = _level_pressure(self.log_deriv, self.mask if restricted else None, t, self.depth)
        before = _level_pressure(self.log_deriv_prev, self.mask_prev if restricted else None, t, self.depth - 2)
        return PressureEstimate(now, abs(now - before))


def _level_pressure(log_deriv: np.ndarray, mask: Optional[np.ndarray], t: float, n: int) -> float:
    values = log_deriv if mask is None else log_deriv[mask]
    if values.size == 0:
        raise EmptyTree(f"every depth-{n} leaf lies in the excluded region")
    return float(logsumexp(-t * values) / n)


def collect_levels(fmap: RationalMap, z, depth: int, exclude: Optional[Region] = None,
                   strict: bool = False, metric: str = "auto", workers: int = 1,
                   leaf_budget: int = DEFAULT_LEAF_BUDGET, beta: float = 0.5) -> LevelSums:
    """
    Grow the tree once and keep the two levels that pressure estimates need.

    Raises:
        UnsafeBasepoint: z fails the safe-point test
        BudgetExceeded: d^depth above the budget
    """
    if depth < 2:
        raise ValueError("depth must be at least 2")
    report = is_safe_point(fmap, z, horizon=depth, beta=beta)
    if not report.safe:
        raise UnsafeBasepoint(f"basepoint {as_complex(z)} is not safe", report)
    kept = {}
    pruned = 0
    for level in iterate_levels(fmap, z, depth, exclude, strict, metric, workers, leaf_budget):
        if level.n in (depth - 2, depth):
            kept[level.n] = (level.log_deriv, ~level.excluded)
        pruned = level.pruned
    if depth not in kept:
        raise EmptyTree("strict exclusion pruned the whole tree")
    ld, mask = kept[depth]
    ld_prev, mask_prev = kept[depth - 2]
    return LevelSums(depth, ld, mask, ld_prev, mask_prev, pruned)


def tree_pressure(fmap: RationalMap, z, t: float, depth: int, metric: str = "auto",
                  workers: int = 1, leaf_budget: int = DEFAULT_LEAF_BUDGET) -> PressureEstimate:
    """
    Tree pressure of -t log|f'| at z.

    Args:
        fmap: The map
        z: Safe basepoint
        t: Inverse temperature
        depth: Tree depth n
        metric: Derivative metric

    Returns:
        PressureEstimate(value, |P_n - P_{n-2}|)
    """
    levels = collect_levels(fmap, z, depth, None, False, metric, workers, leaf_budget)
    return levels.pressure(t, restricted=False)


def hidden_tree_pressure(fmap: RationalMap, z, t: float, V: Region, depth: int, strict: bool = False,
                         metric: str = "auto", workers: int = 1,
                         leaf_budget: int = DEFAULT_LEAF_BUDGET) -> PressureEstimate:
    """
    Hidden tree pressure: the tree pressure over leaves outside V.

    Terminal mode drops leaves in V; strict mode prunes every branch with a
    node in V.

    Raises:
        EmptyTree: every leaf excluded
    """
    levels = collect_levels(fmap, z, depth, V, strict, metric, workers, leaf_budget)
    return levels.pressure(t, restricted=True)


@dataclass
class ChiSup:
    """Largest cycle exponent, with the exponents of cycles in Σ listed separately."""

    value: float
    sigma_exponents: List[float] = field(default_factory=list)
    outside_sigma: Optional[float] = None

    def to_json(self):
        return {"value": self.value, "sigma_exponents": self.sigma_exponents,
                "outside_sigma": self.outside_sigma, "method": "cycle-max"}


def chi_sup_estimate(fmap: RationalMap, sigma, orbits: Iterable[PeriodicOrbit]) -> ChiSup:
    """
    chi_sup as the maximum exponent over non-attracting cycles.

    Args:
        fmap: The map
        sigma: ExceptionalSet (possibly empty)
        orbits: Cycles (an OrbitCatalog or list)

    Returns:
        ChiSup

    Raises:
        EmptySample: no non-attracting cycle given
    """
    cycles = [o for o in orbits if not o.is_attracting]
    if not cycles:
        raise EmptySample(f"no non-attracting cycles for {fmap.name}")
    sigma_exp, outside = [], []
    for orbit in cycles:
        if any(sigma.contains(p) for p in orbit.points):
            sigma_exp.append(orbit.exponent)
        else:
            outside.append(orbit.exponent)
    value = max(o.exponent for o in cycles)
    return ChiSup(value, sigma_exp, max(outside) if outside else None)


@dataclass
class PressureCurve:
    """Sampled t -> (hidden, full, tree) pressures on one backward tree."""

    t_grid: np.ndarray
    hidden: np.ndarray
    full: np.ndarray
    tree: np.ndarray
    chi_sup: float
    convergence: np.ndarray
    tree_convergence: np.ndarray
    basepoint: SpherePoint
    exclusion: Region
    depth: int
    sigma_empty: bool = True
    strict: bool = False
    pruned: int = 0
    t_minus: Optional[float] = None
    chi_sup_detail: Optional[ChiSup] = None
    diagnostics: Dict = field(default_factory=dict)

    def rows(self) -> List[Sequence[float]]:
        return [(float(t), float(h), float(f), float(c), float(tr))
                for t, h, f, c, tr in zip(self.t_grid, self.hidden, self.full, self.convergence, self.tree)]

    def to_json(self):
        return {
            "basepoint": self.basepoint.to_json(),
            "exclusion": self.exclusion.to_json(),
            "depth": self.depth,
            "strict": self.strict,
            "pruned": self.pruned,
            "chi_sup": self.chi_sup_detail.to_json() if self.chi_sup_detail else self.chi_sup,
            "t_minus": self.t_minus,
            "diagnostics": self.diagnostics,
        }


def assemble_curve(fmap: RationalMap, z, t_grid: Sequence[float], V: Region, depth: int, sigma,
                   orbits: Iterable[PeriodicOrbit], strict: bool = False, metric: str = "auto",
                   workers: int = 1, leaf_budget: int = DEFAULT_LEAF_BUDGET) -> PressureCurve:
    """
    Pressure curve with full = max(hidden, -t chi_sup).

    Args:
        fmap: The map
        z: Safe basepoint outside V
        t_grid: Sorted grid of t values
        V: Neighbourhood of Σ
        depth: Tree depth
        sigma: ExceptionalSet
        orbits: Cycle catalog for chi_sup
        strict: Strict branch exclusion

    Returns:
        PressureCurve with invariants evaluated in `diagnostics` and t_minus set
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be non-empty and strictly increasing")
    levels = collect_levels(fmap, z, depth, V, strict, metric, workers, leaf_budget)
    hidden, conv, tree, tree_conv = [], [], [], []
    for tv in t:
        h = levels.pressure(tv, restricted=True)
        tr = levels.pressure(tv, restricted=False) if not strict else h
        hidden.append(h.value)
        conv.append(h.convergence)
        tree.append(tr.value)
        tree_conv.append(tr.convergence)
    chi = chi_sup_estimate(fmap, sigma, orbits)
    hidden = np.array(hidden)
    full = np.maximum(hidden, -t * chi.value)
    curve = PressureCurve(
        t_grid=t,
        hidden=hidden,
        full=full,
        tree=np.array(tree),
        chi_sup=chi.value,
        convergence=np.array(conv),
        tree_convergence=np.array(tree_conv),
        basepoint=SpherePoint.from_complex(as_complex(z)),
        exclusion=V,
        depth=depth,
        sigma_empty=sigma.is_empty,
        strict=strict,
        pruned=levels.pruned,
        chi_sup_detail=chi,
    )
    curve.diagnostics = check_invariants(curve)
    curve.t_minus = phase_transition(curve)
    logger.info(f"pressure curve on {t.size} t values, chi_sup {chi.value:.6f}, t_minus {curve.t_minus}")
    return curve


def check_invariants(curve: PressureCurve) -> Dict:
    """Convexity of full, hidden <= full, and hidden slope range."""
    tol = 10.0 * float(np.max(curve.convergence)) + 1e-9
    report = {"tolerance": tol}
    if curve.t_grid.size >= 3:
        second = curve.full[:-2] - 2.0 * curve.full[1:-1] + curve.full[2:]
        report["convex"] = bool(np.all(second >= -tol))
        report["min_second_difference"] = float(np.min(second))
    else:
        report["convex"] = True
    report["hidden_le_full"] = bool(np.all(curve.hidden <= curve.full + 1e-12))
    if curve.t_grid.size >= 2:
        slopes = np.diff(curve.hidden) / np.diff(curve.t_grid)
        report["hidden_slope_range"] = [float(np.min(slopes)), float(np.max(slopes))]
    if not report["convex"]:
        logger.warning(f"full pressure not convex within {tol:.3e}")
    return report


def phase_transition(curve: PressureCurve, tol: Optional[float] = None) -> Optional[float]:
    """
    Locate t_minus = sup{t < 0 : P(t) = -t chi_sup} on the curve.

    With g = hidden + t chi_sup, the transition is the largest negative grid
    point with g < -tol, refined on the linear interpolant towards the next
    grid point. Non-exceptional maps have no transition.

    Args:
        curve: PressureCurve
        tol: Gap tolerance (default max(1e-3, 10 max convergence))

    Returns:
        t_minus or None

    Raises:
        GridTooCoarse: the region g < -tol is not a single left block
    """
    if tol is None:
        tol = max(TRANSITION_TOL_FLOOR, 10.0 * float(np.max(curve.convergence)))
    t = curve.t_grid
    g = curve.hidden + t * curve.chi_sup
    negative = t < 0
    below = (g < -tol) & negative
    if curve.sigma_empty:
        if np.any(below):
            logger.info("hidden pressure falls below -t chi_sup on a map without exceptional set; "
                        "treated as finite-depth deficit")
        return None
    if not np.any(below):
        return None
    idx = np.nonzero(negative)[0]
    flags = below[idx].astype(int)
    changes = int(np.count_nonzero(np.diff(flags)))
    if changes > 1 or (changes == 1 and not flags[0]):
        raise GridTooCoarse(f"gap region changes sign {changes} times on the negative grid")
    a = int(np.nonzero(below)[0][-1])
    if a + 1 >= t.size:
        return float(t[a])
    ga, gb = g[a], g[a + 1]
    if gb <= ga:
        return float(t[a])
    root = t[a] + (t[a + 1] - t[a]) * (-ga) / (gb - ga)
    return float(min(root, t[a + 1], 0.0))


# ----------------------------------------------------------------------
# robustness diagnostics


def basepoint_robustness(fmap: RationalMap, z1, z2, t: float, depth: int, metric: str = "auto") -> Dict:
    """Tree pressures at two safe basepoints and whether they agree within 2 (c1 + c2)."""
    p1 = tree_pressure(fmap, z1, t, depth, metric)
    p2 = tree_pressure(fmap, z2, t, depth, metric)
    bound = 2.0 * (p1.convergence + p2.convergence)
    diff = abs(p1.value - p2.value)
    return {"values": [p1.value, p2.value], "convergence": [p1.convergence, p2.convergence],
            "difference": diff, "bound": bound, "ok": bool(diff <= bound)}


def exclusion_robustness(fmap: RationalMap, z, t: float, sigma, radius: float, depth: int,
                         metric: str = "auto") -> Dict:
    """Hidden pressure with V = B(Σ, r) against V = B(Σ, r/2)."""
    V = Region.around(sigma.points, radius)
    half = Region.around(sigma.points, radius / 2.0)
    big = hidden_tree_pressure(fmap, z, t, V, depth, metric=metric)
    small = hidden_tree_pressure(fmap, z, t, half, depth, metric=metric)
    diff = abs(big.value - small.value)
    bound = 3.0 * max(big.convergence, small.convergence)
    return {"radius": radius, "values": [big.value, small.value], "difference": diff,
            "bound": bound, "ok": bool(diff <= bound)}
