"""
Exceptional set detection and essential exponents.

The exceptional set is the largest finite forward-invariant set of
non-attracting periodic points and their preimages whose outside preimages
are all critical. It has at most four points, so the search runs over a
small candidate pool: points of non-attracting cycles of period <= 4 and
their preimages up to a configurable depth.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from julia_pressure.errors import MapNotExceptional, NotAnExceptionalPreimage
from julia_pressure.orbits.periodic import OrbitCatalog, PeriodicOrbit, find_periodic_orbits
from julia_pressure.sphere.point import SpherePoint, as_array, as_complex, chordal_distance
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

MAX_SIGMA = 4
SIGMA_PERIOD = 4
POINT_TOL = 1e-7

# preimage outside the pool
OTHER = -1


@dataclass
class ExceptionalSet:
    """The exceptional set with its expanding / neutral partition."""

    points: List[SpherePoint] = field(default_factory=list)
    sigma_plus: List[SpherePoint] = field(default_factory=list)
    sigma_zero: List[SpherePoint] = field(default_factory=list)
    cycle_roots: List[PeriodicOrbit] = field(default_factory=list)
    certificate: List[Dict] = field(default_factory=list)
    pool_size: int = 0
    pool_depth: int = 2
    max_period: int = SIGMA_PERIOD
    complete: bool = True

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def point_array(self) -> np.ndarray:
        return as_array(self.points)

    def contains(self, z, tol: float = POINT_TOL) -> bool:
        if self.is_empty:
            return False
        return bool(np.any(chordal_distance(as_complex(z), self.point_array()) <= tol))

    def index_of(self, z, tol: float = POINT_TOL) -> Optional[int]:
        if self.is_empty:
            return None
        dist = chordal_distance(as_complex(z), self.point_array())
        k = int(np.argmin(dist))
        return k if dist[k] <= tol else None

    def to_json(self):
        return {
            "points": [p.to_json() for p in self.points],
            "sigma_plus": [p.to_json() for p in self.sigma_plus],
            "sigma_zero": [p.to_json() for p in self.sigma_zero],
            "cycle_roots": [o.to_json() for o in self.cycle_roots],
            "certificate": self.certificate,
            "pool_size": self.pool_size,
            "pool_depth": self.pool_depth,
            "max_period": self.max_period,
            "complete": self.complete,
        }


def _index_in(pool: np.ndarray, z: complex) -> int:
    if pool.size == 0:
        return OTHER
    dist = chordal_distance(z, pool)
    k = int(np.argmin(dist))
    return k if dist[k] <= POINT_TOL else OTHER


def _is_critical(fmap: RationalMap, z: complex) -> bool:
    return fmap.local_degree(z) > 1


def build_pool(fmap: RationalMap, cycles: List[PeriodicOrbit], depth: int) -> np.ndarray:
    """Cycle points plus their preimages up to `depth` steps, deduplicated."""
    pool: List[complex] = []

    def add(z: complex) -> bool:
        if pool and float(np.min(chordal_distance(z, np.array(pool)))) <= POINT_TOL:
            return False
        pool.append(z)
        return True

    frontier = []
    for orbit in cycles:
        for value in orbit.point_array():
            if add(value):
                frontier.append(value)
    for _ in range(depth):
        if not frontier:
            break
        preimages = fmap.preimages_array(np.array(frontier)).reshape(-1)
        frontier = [x for x in preimages if add(x)]
    return np.array(pool, dtype=complex)


def _pool_tables(fmap: RationalMap, pool: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Image index per pool point, and per preimage its pool index (or OTHER) and criticality."""
    images = fmap.evaluate_array(pool)
    image_index = np.array([_index_in(pool, w) for w in images], dtype=int)
    preimages = fmap.preimages_array(pool)
    pre_index = np.empty(preimages.shape, dtype=int)
    pre_crit = np.empty(preimages.shape, dtype=bool)
    for i in range(pool.size):
        for j, x in enumerate(preimages[i]):
            pre_index[i, j] = _index_in(pool, x)
            pre_crit[i, j] = _is_critical(fmap, x)
    return image_index, pre_index, pre_crit


def _forward_closure(image_index: np.ndarray, i: int) -> Optional[frozenset]:
    seen = []
    while i not in seen:
        if i < 0 or len(seen) >= MAX_SIGMA:
            return None
        seen.append(i)
        i = int(image_index[i])
    return frozenset(seen)


def _passes(subset: frozenset, pre_index: np.ndarray, pre_crit: np.ndarray) -> bool:
    for i in subset:
        for k, critical in zip(pre_index[i], pre_crit[i]):
            if not critical and k not in subset:
                return False
    return True


def detect_exceptional(fmap: RationalMap, max_period: int = SIGMA_PERIOD, pool_depth: int = 2,
                       catalog: Optional[OrbitCatalog] = None) -> ExceptionalSet:
    """
    Detect the exceptional set by exhaustive search over the candidate pool.

    Every forward-invariant set is a union of forward closures, so the search
    enumerates unions of closures of size <= 4 and keeps those whose outside
    preimages are all critical. The result is the union of all passing sets.

    Args:
        fmap: The map
        max_period: Period bound for the cycle enumeration
        pool_depth: Preimage steps added to the pool
        catalog: Reuse an existing cycle catalog

    Returns:
        ExceptionalSet (empty for non-exceptional maps)
    """
    if catalog is None:
        catalog = find_periodic_orbits(fmap, max_period)
    cycles = [o for o in catalog.non_attracting() if o.period <= max_period]
    pool = build_pool(fmap, cycles, pool_depth)
    image_index, pre_index, pre_crit = _pool_tables(fmap, pool)

    # a point with a preimage outside pool and Crit can never belong
    viable = ~np.any((pre_index == OTHER) & ~pre_crit, axis=1)
    closures = set()
    for i in np.nonzero(viable)[0]:
        closure = _forward_closure(image_index, int(i))
        if closure is not None and all(viable[j] for j in closure):
            closures.add(closure)
    closures = sorted(closures, key=lambda s: (len(s), sorted(s)))

    passing: List[frozenset] = []

    def search(start: int, current: frozenset):
        if current and _passes(current, pre_index, pre_crit):
            passing.append(current)
        for k in range(start, len(closures)):
            union = current | closures[k]
            if len(union) <= MAX_SIGMA and union != current:
                search(k + 1, union)

    search(0, frozenset())
    members = sorted(set().union(*passing)) if passing else []
    if len(members) > MAX_SIGMA:
        logger.warning(f"union of passing sets has {len(members)} points, more than {MAX_SIGMA}")

    result = ExceptionalSet(pool_size=int(pool.size), pool_depth=pool_depth,
                            max_period=max_period, complete=catalog.complete)
    if not catalog.complete:
        logger.warning("cycle enumeration incomplete: exceptional set only searched up to the period bound")
    for i in members:
        point = SpherePoint.from_complex(pool[i])
        root = _cycle_root(fmap, pool[i], catalog)
        result.points.append(point)
        result.cycle_roots.append(root)
        if root.classification == "expanding":
            result.sigma_plus.append(point)
        else:
            result.sigma_zero.append(point)
    for i in members:
        result.certificate.append(_certificate(fmap, pool, i, image_index, pre_index, members))
    logger.info(f"{fmap.name}: exceptional set {[p for p in result.points]}")
    return result


def _cycle_root(fmap: RationalMap, z: complex, catalog: OrbitCatalog) -> PeriodicOrbit:
    w = z
    for _ in range(MAX_SIGMA + 1):
        orbit = catalog.containing(w, POINT_TOL)
        if orbit is not None:
            return orbit
        w = fmap.evaluate_array(np.array([w]))[0]
    raise MapNotExceptional(f"point {z} does not reach a cataloged cycle")


def _certificate(fmap: RationalMap, pool: np.ndarray, i: int, image_index: np.ndarray,
                 pre_index: np.ndarray, members: List[int]) -> Dict:
    preimages = fmap.preimages_array(pool[i:i + 1])[0]
    entries = []
    for x, k in zip(preimages, pre_index[i]):
        entries.append({
            "point": SpherePoint.from_complex(x).to_json(),
            "class": "sigma" if k in members else "critical",
        })
    return {
        "point": SpherePoint.from_complex(pool[i]).to_json(),
        "image": SpherePoint.from_complex(pool[int(image_index[i])]).to_json(),
        "preimages": entries,
    }


# ----------------------------------------------------------------------
# essential exponents


@dataclass
class CriticalEntry:
    """A critical point c in f^-1(Σ) minus Σ with its route to the cycle."""

    point: SpherePoint
    steps: int
    degree: int
    cycle: PeriodicOrbit
    chi_ess: float

    def to_json(self):
        return {
            "point": self.point.to_json(),
            "steps": self.steps,
            "degree": self.degree,
            "cycle_exponent": self.cycle.exponent,
            "chi_ess": self.chi_ess,
        }


def _critical_entry(fmap: RationalMap, sigma: ExceptionalSet, c) -> CriticalEntry:
    cc = as_complex(c)
    if sigma.contains(cc) or not sigma.contains(fmap.evaluate(cc)):
        raise NotAnExceptionalPreimage(f"{SpherePoint.from_complex(cc)} is not in f^-1(Σ) minus Σ")
    w = fmap.evaluate_array(np.array([cc]))[0]
    k = 1
    while True:
        idx = sigma.index_of(w)
        root = sigma.cycle_roots[idx]
        if root.contains(w, POINT_TOL):
            break
        w = fmap.evaluate_array(np.array([w]))[0]
        k += 1
    degree = fmap.local_degree_iterate(cc, k)
    chi = 0.0 if root.classification == "neutral" else root.exponent / degree
    return CriticalEntry(SpherePoint.from_complex(cc), k, degree, root, chi)


def chi_ess(fmap: RationalMap, sigma: ExceptionalSet, c) -> float:
    """
    Essential exponent chi(p) / deg_{f^k}(c) of c in f^-1(Σ) minus Σ.

    k is minimal with f^k(c) periodic; the value is 0 for a neutral cycle.

    Raises:
        NotAnExceptionalPreimage: c is in Σ or f(c) is not
    """
    return _critical_entry(fmap, sigma, c).chi_ess


def critical_entries(fmap: RationalMap, sigma: ExceptionalSet) -> List[CriticalEntry]:
    """All critical points of f^-1(Σ) minus Σ with their essential exponents."""
    entries = []
    if sigma.is_empty:
        return entries
    for c, _ in fmap.critical_points():
        if sigma.contains(c) or not sigma.contains(fmap.evaluate(c)):
            continue
        entries.append(_critical_entry(fmap, sigma, c))
    return entries


def chi_ess_plus(fmap: RationalMap, sigma: ExceptionalSet) -> float:
    """
    Largest essential exponent over f^-1(Σ) minus Σ.

    Raises:
        MapNotExceptional: Σ is empty
    """
    if sigma.is_empty:
        raise MapNotExceptional(f"{fmap.name} has an empty exceptional set")
    entries = critical_entries(fmap, sigma)
    if not entries:
        raise MapNotExceptional(f"no critical point of {fmap.name} maps into the exceptional set")
    return max(e.chi_ess for e in entries)


@dataclass
class DegreeReport:
    """D = max deg_{f^k}(c) and the check alpha_plus <= D * alpha_tilde_plus."""

    D: int
    alpha_plus: Optional[float] = None
    alpha_tilde_plus: Optional[float] = None
    holds: Optional[bool] = None

    def to_json(self):
        return {"D": self.D, "alpha_plus": self.alpha_plus,
                "alpha_tilde_plus": self.alpha_tilde_plus, "holds": self.holds}


def degree_constant(fmap: RationalMap, sigma: ExceptionalSet, alpha_plus: Optional[float] = None,
                    alpha_tilde_plus: Optional[float] = None, tol: float = 1e-6) -> DegreeReport:
    """
    Degree constant D, 1 for non-exceptional maps.

    Args:
        fmap: The map
        sigma: Exceptional set
        alpha_plus: Optional estimate of the largest exponent
        alpha_tilde_plus: Optional estimate of the largest non-atomic exponent
        tol: Slack on the inequality

    Returns:
        DegreeReport (holds is None unless both estimates are given)
    """
    entries = critical_entries(fmap, sigma)
    D = max((e.degree for e in entries), default=1)
    report = DegreeReport(D, alpha_plus, alpha_tilde_plus)
    if alpha_plus is not None and alpha_tilde_plus is not None:
        report.holds = bool(alpha_plus <= D * alpha_tilde_plus + tol)
    return report
