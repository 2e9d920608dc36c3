"""
Periodic orbits with multipliers.

Cycles of period n are read off the fixed points of f^n. While d^n is small
the homogeneous pair (P_n, Q_n) of f^n is composed explicitly and the
fixed points are the roots of P_n - z Q_n (plus infinity for every unit of
degree deficiency). Those roots lose accuracy as d^n grows, so each inverse
branch of f^n also contributes its pulled-back fixed point, and every
candidate is Newton-polished before its period is tested. A period whose
cycle count falls short of the count for a degree-d map is flagged
incomplete, as is every period beyond the composition limit (Newton
multi-start from a Julia-set sample).
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.spatial import cKDTree

from julia_pressure.errors import ConfigError
from julia_pressure.sphere.point import (
    INF,
    SpherePoint,
    as_array,
    as_complex,
    chordal_distance,
    is_infinite,
    to_sphere,
)
from julia_pressure.sphere.rational_map import RationalMap
from julia_pressure.sphere.roots import companion_roots

logger = logging.getLogger(__name__)

NEUTRAL_BAND = 1e-6
COMPOSITION_LIMIT = 4096
MAX_PERIOD = 12
PULLBACK_SWEEPS = 4

# chordal tolerances
FIXED_POINT_TOL = 1e-9   # |f^n(z) - z|, scaled by max(1, |(f^n)'|)
FIXED_POINT_CAP = 1e-5
DIVISOR_TOL = 1e-9       # f^k(z) = z for a proper divisor k of n
MATCH_TOL = 1e-10        # two polished cycle points are the same point


@dataclass
class PeriodicOrbit:
    """A cycle z_0 -> z_1 -> ... -> z_{n-1} -> z_0."""

    points: List[SpherePoint]
    period: int
    multiplier: complex
    exponent: float
    classification: str

    @classmethod
    def from_point(cls, fmap: RationalMap, z, period: int) -> "PeriodicOrbit":
        """
        Build the cycle through z, assuming z has exact period `period`.

        The multiplier is the product of chart derivatives, with the chart at
        each cycle point fixed once so that the product telescopes.
        """
        values = [as_complex(z)]
        for _ in range(period - 1):
            values.append(fmap.evaluate_array(np.array([values[-1]]))[0])
        return cls.from_cycle(fmap, values)

    @classmethod
    def from_cycle(cls, fmap: RationalMap, values) -> "PeriodicOrbit":
        """Build the cycle from its points in orbit order."""
        values = [as_complex(v) for v in values]
        period = len(values)
        flags = [bool(is_infinite(v)) or abs(v) > 1.0 for v in values]
        multiplier = 1.0 + 0j
        for j in range(period):
            multiplier *= fmap.chart_derivative(values[j], flags[j], flags[(j + 1) % period])
        modulus = abs(multiplier)
        exponent = float(np.log(modulus) / period) if modulus > 0 else float("-inf")
        return cls(
            points=[SpherePoint.from_complex(v) for v in values],
            period=period,
            multiplier=complex(multiplier),
            exponent=exponent,
            classification=classify_multiplier(multiplier),
        )

    def point_array(self) -> np.ndarray:
        return as_array(self.points)

    def contains(self, z, tol: float = 1e-7) -> bool:
        return bool(np.any(chordal_distance(as_complex(z), self.point_array()) <= tol))

    @property
    def is_attracting(self) -> bool:
        return self.classification == "attracting"

    def to_json(self):
        return {
            "period": self.period,
            "points": [p.to_json() for p in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "exponent": self.exponent,
            "class": self.classification,
        }


def classify_multiplier(multiplier: complex, band: float = NEUTRAL_BAND) -> str:
    modulus = abs(multiplier)
    if modulus < 1.0 - band:
        return "attracting"
    if modulus > 1.0 + band:
        return "expanding"
    return "neutral"


@dataclass
class OrbitCatalog:
    """Cycles found up to a period bound, with an enumeration-completeness flag."""

    orbits: List[PeriodicOrbit] = field(default_factory=list)
    max_period: int = 0
    complete: bool = True
    missing: List[int] = field(default_factory=list)

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self) -> int:
        return len(self.orbits)

    def by_period(self, n: int) -> List[PeriodicOrbit]:
        return [o for o in self.orbits if o.period == n]

    def non_attracting(self) -> List[PeriodicOrbit]:
        return [o for o in self.orbits if not o.is_attracting]

    def outside(self, points: Iterable, tol: float = 1e-7) -> List[PeriodicOrbit]:
        """Cycles sharing no point with the given set."""
        avoid = as_array(points)
        if avoid.size == 0:
            return list(self.orbits)
        return [o for o in self.orbits
                if not np.any(chordal_distance(o.point_array()[:, None], avoid[None, :]) <= tol)]

    def containing(self, z, tol: float = 1e-7) -> Optional[PeriodicOrbit]:
        for orbit in self.orbits:
            if orbit.contains(z, tol):
                return orbit
        return None

    def to_json(self):
        return {
            "max_period": self.max_period,
            "complete": self.complete,
            "missing": list(self.missing),
            "orbits": [o.to_json() for o in self.orbits],
        }


def compose_homogeneous(fmap: RationalMap, n: int):
    """
    Coefficients of (P_n, Q_n) with f^n = P_n / Q_n, normalised each step.

    Args:
        fmap: The map
        n: Number of compositions

    Returns:
        Tuple (P_n, Q_n) of ascending coefficient arrays
    """
    d = fmap.degree
    Pn = np.array([0.0, 1.0], dtype=complex)
    Qn = np.array([1.0], dtype=complex)
    for _ in range(n):
        p_pows = [np.array([1.0], dtype=complex)]
        q_pows = [np.array([1.0], dtype=complex)]
        for _k in range(d):
            p_pows.append(P.polymul(p_pows[-1], Pn))
            q_pows.append(P.polymul(q_pows[-1], Qn))
        new_p = np.zeros(1, dtype=complex)
        new_q = np.zeros(1, dtype=complex)
        for k in range(d + 1):
            term = P.polymul(p_pows[k], q_pows[d - k])
            if fmap.numerator[k] != 0:
                new_p = P.polyadd(new_p, fmap.numerator[k] * term)
            if fmap.denominator[k] != 0:
                new_q = P.polyadd(new_q, fmap.denominator[k] * term)
        scale = max(np.max(np.abs(new_p)), np.max(np.abs(new_q)))
        Pn, Qn = new_p / scale, new_q / scale
    return Pn, Qn


def newton_periodic(fmap: RationalMap, z: np.ndarray, period: int, steps: int = 8) -> np.ndarray:
    """Vectorised Newton on f^period(z) - z for finite points of moderate size."""
    z = np.array(z, dtype=complex, copy=True)
    prev_z = z.copy()
    prev_r = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(steps + 1):
            w = z.copy()
            slope = np.ones_like(z)
            for _k in range(period):
                slope = slope * fmap.derivative_array(w)
                w = fmap.evaluate_array(w)
            r = np.abs(w - z)
            r = np.where(np.isfinite(r), r, np.inf)
            # a step that raised the residual is undone and the point frozen
            worse = active & (r > prev_r)
            z = np.where(worse, prev_z, z)
            active &= ~worse
            prev_z = z.copy()
            prev_r = np.where(active, r, prev_r)
            candidate = z - (w - z) / (slope - 1.0)
            ok = active & np.isfinite(candidate) & (np.abs(candidate) < 1e8)
            z = np.where(ok, candidate, z)
    return prev_z


def exact_period(fmap: RationalMap, z: complex, n: int, tol: float) -> Optional[int]:
    """Smallest k <= n with f^k(z) = z, if it divides n."""
    orbit = fmap.iterate_array(np.array([z]), n)[:, 0]
    for k in range(1, n + 1):
        if n % k == 0 and float(chordal_distance(orbit[k], z)) <= tol:
            return k
    return None


def _mobius(m: int) -> int:
    result, p = 1, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def expected_cycle_count(d: int, n: int) -> int:
    """
    Cycles of exact period n of a degree-d rational map, counted with multiplicity.

    f^n has d^n + 1 fixed points on the sphere; Moebius inversion over the
    divisors of n leaves the points of exact period n.
    """
    points = sum(_mobius(n // k) * (d ** k + 1) for k in range(1, n + 1) if n % k == 0)
    return points // n


def _polish(fmap: RationalMap, z: np.ndarray, n: int, steps: int) -> np.ndarray:
    z = np.array(z, dtype=complex, copy=True)
    with np.errstate(invalid="ignore"):
        finite = ~is_infinite(z) & (np.abs(z) < 1e6)
    if np.any(finite):
        z[finite] = newton_periodic(fmap, z[finite], n, steps=steps)
    return z


def _fixed_point_error(fmap: RationalMap, z: np.ndarray, n: int):
    """
    Residual of f^n(z) = z with the Newton step it implies.

    Returns:
        Tuple (chordal residual, step estimate, max(1, |(f^n)'(z)|))
    """
    w = np.array(z, dtype=complex, copy=True)
    slope = np.ones_like(w)
    with np.errstate(all="ignore"):
        for _ in range(n):
            slope = slope * fmap.derivative_array(w)
            w = fmap.evaluate_array(w)
        residual = chordal_distance(w, z)
        gain = np.abs(slope - 1.0)
        usable = np.isfinite(gain) & (gain > 0)
        step = np.where(usable, residual / np.where(usable, gain, 1.0), residual)
        modulus = np.abs(slope)
        scale = np.where(np.isfinite(modulus), np.maximum(1.0, modulus), 1.0)
    return residual, step, scale


def _exact_periods(fmap: RationalMap, z: np.ndarray, n: int, tol: float = DIVISOR_TOL) -> np.ndarray:
    """Smallest divisor k of n with f^k(z) = z; n where no proper divisor returns."""
    orbit = fmap.iterate_array(z, n)
    periods = np.full(z.shape, n)
    for k in range(n - 1, 0, -1):
        if n % k == 0:
            periods = np.where(chordal_distance(orbit[k], z) <= tol, k, periods)
    return periods


def _distinct(z: np.ndarray, step: np.ndarray, tol: float):
    """Drop near-duplicates, keeping the best-converged copy of each point."""
    if z.size == 0:
        return z, step
    order = np.argsort(step, kind="stable")
    z, step = z[order], step[order]
    coords = to_sphere(z)
    near = cKDTree(coords).query_ball_point(coords, r=tol + 4.0 * step)
    keep = np.zeros(z.size, dtype=bool)
    for i, neighbours in enumerate(near):
        keep[i] = not any(keep[j] for j in neighbours)
    return z[keep], step[keep]


def _assemble_cycles(fmap: RationalMap, z: np.ndarray, n: int, tol: float) -> List[PeriodicOrbit]:
    """
    Group distinct points of exact period n into cycles.

    Every forward image is re-polished so that the orbit rows stay accurate
    enough to be matched against the candidate set.
    """
    if z.size == 0:
        return []
    rows = [z]
    for _ in range(n - 1):
        rows.append(_polish(fmap, fmap.evaluate_array(rows[-1]), n, steps=4))
    orbits = np.stack(rows)
    dist, idx = cKDTree(to_sphere(z)).query(to_sphere(orbits).reshape(-1, 3))
    dist, idx = dist.reshape(orbits.shape), idx.reshape(orbits.shape)
    used = np.zeros(z.size, dtype=bool)
    cycles = []
    for i in range(z.size):
        if used[i]:
            continue
        used[i] = True
        used[idx[:, i][dist[:, i] <= tol]] = True
        cycles.append(PeriodicOrbit.from_cycle(fmap, orbits[:, i]))
    return cycles


def _cycles_from_candidates(fmap: RationalMap, candidates: np.ndarray, n: int,
                            tol: float) -> List[PeriodicOrbit]:
    z = _polish(fmap, candidates, n, steps=30)
    residual, step, scale = _fixed_point_error(fmap, z, n)
    fixed = residual <= np.minimum(FIXED_POINT_CAP, FIXED_POINT_TOL * scale)
    periods = _exact_periods(fmap, z, n)
    keep = fixed & (periods == n)
    logger.debug(f"period {n}: {z.size} candidates, {np.count_nonzero(~fixed)} not fixed by f^n, "
                 f"{np.count_nonzero(fixed & (periods != n))} of lower period")
    z, _ = _distinct(z[keep], step[keep], tol)
    return _assemble_cycles(fmap, z, n, tol)


def _candidates_by_composition(fmap: RationalMap, n: int) -> np.ndarray:
    Pn, Qn = compose_homogeneous(fmap, n)
    fixed_poly = P.polysub(Pn, P.polymul([0.0, 1.0], Qn))
    roots = companion_roots(fixed_poly)
    expected = fmap.degree ** n + 1
    deficit = expected - roots.size
    logger.debug(f"period {n}: {roots.size} finite fixed points of f^n, {deficit} at infinity")
    if deficit > 0:
        roots = np.concatenate([roots, np.array([INF])])
    return roots


def _pullback_base(fmap: RationalMap, catalog: OrbitCatalog) -> Optional[complex]:
    """The expanding fixed point farthest from the early critical-value orbits."""
    fixed = as_array([o.points[0] for o in catalog.by_period(1) if o.classification == "expanding"])
    fixed = fixed[~is_infinite(fixed)]
    if fixed.size == 0:
        return None
    post = fmap.iterate_array(fmap.critical_array, 8)[1:].reshape(-1)
    gap = np.min(chordal_distance(fixed[:, None], post[None, :]), axis=1)
    return complex(fixed[np.argmax(gap)])


def _candidates_by_pullback(fmap: RationalMap, catalog: OrbitCatalog, n: int,
                            sweeps: int = PULLBACK_SWEEPS) -> np.ndarray:
    """
    One candidate per inverse branch of f^n.

    The points of f^-n(b) are pulled back again along their own itinerary;
    each repeat contracts towards the repelling fixed point of that branch.
    """
    base = _pullback_base(fmap, catalog)
    if base is None:
        return np.zeros(0, dtype=complex)
    x = np.array([base])
    for _ in range(n):
        x = fmap.preimages_array(x, check=False).reshape(-1)
    x = x[~is_infinite(x)]
    rows = np.arange(x.size)
    for _ in range(sweeps):
        orbit = fmap.iterate_array(x, n)
        y = x
        for k in range(n - 1, -1, -1):
            pre = fmap.preimages_array(y, check=False)
            y = pre[rows, np.argmin(chordal_distance(pre, orbit[k][:, None]), axis=1)]
        x = y
    return x


def find_periodic_orbits(fmap: RationalMap, max_period: int, match_tol: float = MATCH_TOL,
                         seeds: Optional[np.ndarray] = None, seed: int = 7) -> OrbitCatalog:
    """
    Enumerate cycles of period 1..max_period.

    Candidates are the roots of the composed fixed-point polynomial plus one
    pulled-back point per inverse branch of f^n; all are Newton-polished on
    f^n(z) - z before the period test. Each period's cycle count is checked
    against the count a degree-d map must have.

    Args:
        fmap: The map
        max_period: Largest period (at most 12)
        match_tol: Chordal tolerance for identifying polished cycle points
        seeds: Newton seeds for periods beyond the composition limit
        seed: Sampling seed used when seeds must be generated

    Returns:
        OrbitCatalog; complete is False when a period came up short of its
        expected count or used Newton multi-start
    """
    if max_period < 1 or max_period > MAX_PERIOD:
        raise ConfigError(f"max_period must lie in 1..{MAX_PERIOD}")
    catalog = OrbitCatalog(max_period=max_period)
    for n in range(1, max_period + 1):
        if fmap.degree ** n <= COMPOSITION_LIMIT:
            candidates = _candidates_by_composition(fmap, n)
            if n > 1:
                candidates = np.concatenate([candidates, _candidates_by_pullback(fmap, catalog, n)])
            exhaustive = True
        else:
            if seeds is None:
                seeds = _default_seeds(fmap, catalog, seed)
            candidates = seeds
            exhaustive = False
        cycles = _cycles_from_candidates(fmap, candidates, n, match_tol)
        catalog.orbits.extend(cycles)

        expected = expected_cycle_count(fmap.degree, n)
        if len(cycles) > expected:
            logger.warning(f"period {n}: {len(cycles)} cycles exceed the expected {expected}")
        if not exhaustive or len(cycles) < expected:
            logger.debug(f"period {n}: {len(cycles)} of {expected} cycles")
            catalog.complete = False
            catalog.missing.append(n)
        else:
            logger.debug(f"period {n}: {len(cycles)} cycles")
    if not catalog.complete:
        logger.warning(f"periodic enumeration incomplete for periods {catalog.missing}")
    logger.info(f"{fmap.name}: {len(catalog)} cycles up to period {max_period}")
    return catalog


def _default_seeds(fmap: RationalMap, catalog: OrbitCatalog, seed: int) -> np.ndarray:
    from julia_pressure.orbits.sampling import julia_sample

    repelling = [o for o in catalog.orbits if o.classification == "expanding"]
    if not repelling:
        return np.zeros(0, dtype=complex)
    start = repelling[0].points[0]
    return as_array(julia_sample(fmap, start, 4000, seed))
