"""
Julia-set sampling by random inverse iteration, and safe-point testing.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from julia_pressure.errors import UnsafeBasepoint
from julia_pressure.orbits.regions import Region
from julia_pressure.sphere.point import SpherePoint, as_complex, chordal_distance
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by the seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def julia_sample_array(fmap: RationalMap, z0, count: int, seed: int, burn_in: int = 60) -> np.ndarray:
    """
    `count` independent inverse-iteration chains started at z0.

    Each chain takes `burn_in` random backward branches; the final positions
    are returned. Deterministic for a fixed seed.
    """
    rng = make_rng(seed)
    z = np.full(count, as_complex(z0), dtype=complex)
    d = fmap.degree
    rows = np.arange(count)
    for _ in range(burn_in):
        pre = fmap.preimages_array(z, check=False)
        z = pre[rows, rng.integers(0, d, size=count)]
    return z


def julia_sample(fmap: RationalMap, z0, count: int, seed: int, burn_in: int = 60) -> List[SpherePoint]:
    """
    Sample the Julia set by random backward branches.

    Args:
        fmap: The map
        z0: Starting point in J (or a point whose preimages accumulate on J)
        count: Number of points
        seed: Generator key
        burn_in: Backward steps per chain

    Returns:
        List of `count` SpherePoints
    """
    return [SpherePoint.from_complex(v) for v in julia_sample_array(fmap, z0, count, seed, burn_in)]


@dataclass
class SafetyReport:
    """Outcome of the finite-horizon safe-point test."""

    safe: bool
    horizon: int
    beta: float
    worst_margin: float
    worst_step: int
    on_critical_orbit: bool
    expanding: Optional[bool] = None

    def to_json(self):
        return {
            "safe": self.safe,
            "horizon": self.horizon,
            "beta": self.beta,
            "worst_margin": self.worst_margin,
            "worst_step": self.worst_step,
            "on_critical_orbit": self.on_critical_orbit,
            "expanding": self.expanding,
            "heuristic": True,
        }


def is_safe_point(fmap: RationalMap, z, horizon: int, beta: float = 0.5,
                  tol: float = 1e-9, expanding_rate: Optional[float] = None) -> SafetyReport:
    """
    Finite-horizon safe-point test.

    z is safe when dist(z, f^n(Crit)) >= beta^n for 1 <= n <= horizon. The
    margin reported is min_n (log dist_n - n log beta), negative when unsafe.

    Args:
        fmap: The map
        z: Candidate basepoint
        horizon: Number of forward steps of the critical orbit
        beta: Decay rate in (0, 1)
        tol: Chordal tolerance for "lies on the critical orbit"
        expanding_rate: Optional lambda > 1 for the |(f^n)'(z)| >= lambda^n flag

    Returns:
        SafetyReport
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    zc = as_complex(z)
    orbit = fmap.iterate_array(fmap.critical_array, horizon)[1:]
    dist = np.min(chordal_distance(zc, orbit), axis=1)
    with np.errstate(divide="ignore"):
        margins = np.log(dist) - np.arange(1, horizon + 1) * np.log(beta)
    worst = int(np.argmin(margins))
    on_orbit = bool(np.min(dist) <= tol)
    safe = bool(margins[worst] >= 0.0) and not on_orbit
    expanding = None
    if expanding_rate is not None:
        points = fmap.iterate_array(np.array([zc]), horizon - 1)[:, 0]
        sums = np.cumsum(fmap.log_derivative_array(points))
        expanding = bool(np.all(sums >= np.arange(1, horizon + 1) * np.log(expanding_rate) - 1e-12))
    return SafetyReport(safe, horizon, beta, float(margins[worst]), worst + 1, on_orbit, expanding)


def choose_basepoint(fmap: RationalMap, start, avoid: Optional[Region] = None, seed: int = 7,
                     horizon: int = 30, beta: float = 0.5, count: int = 200) -> SpherePoint:
    """
    First safe point of a Julia sample that lies outside `avoid`.

    Args:
        fmap: The map
        start: A point of J to start inverse iteration from
        avoid: Region the basepoint must not lie in
        seed: Sampling seed
        horizon: Safe-point horizon
        beta: Safe-point decay rate
        count: Sample size to search

    Returns:
        The chosen basepoint

    Raises:
        UnsafeBasepoint: no sampled point qualifies
    """
    avoid = avoid or Region.empty()
    sample = julia_sample_array(fmap, start, count, seed)
    outside = ~avoid.contains_array(sample)
    for value in sample[outside]:
        report = is_safe_point(fmap, value, horizon, beta)
        if report.safe:
            logger.debug(f"basepoint {value:.6g} (margin {report.worst_margin:.3f})")
            return SpherePoint.from_complex(value)
    raise UnsafeBasepoint(f"no safe basepoint among {count} sampled points")
