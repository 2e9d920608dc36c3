"""
Hyperbolic times, largest exponents outside a region, and periodic shadowing.

Orbit exponents are handled through prefix sums a(x, m) = log|(f^m)'(x)|.
n is a Pliss time at rate chi when a(x, n) - a(x, m) >= (n - m) chi for
every m < n, which is the same as b_n >= max_{m<n} b_m for b_m = a(x, m) - m chi.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from julia_pressure.analysis.exceptional import ExceptionalSet, critical_entries
from julia_pressure.errors import EmptySample, NotAnExceptionalPreimage, OrbitHitsCritical, SeedDiverged
from julia_pressure.orbits.periodic import OrbitCatalog, PeriodicOrbit, exact_period, newton_periodic
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import julia_sample_array
from julia_pressure.sphere.point import SpherePoint, as_complex, chordal_distance, is_infinite
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

PLISS_TOL = 1e-9
CRITICAL_TOL = 1e-9
SHADOW_START = 4


@dataclass
class OrbitAnalysis:
    """Forward orbit of x with exponent prefix sums and region itinerary."""

    base: SpherePoint
    length: int
    points: np.ndarray
    log_derivs: np.ndarray
    region_itinerary: Optional[np.ndarray] = None

    def pliss_times(self, chi: float, tol: float = PLISS_TOL) -> List[int]:
        b = self.log_derivs - np.arange(self.length + 1) * chi
        running = np.maximum.accumulate(b)
        # n qualifies when b_n >= max(b_0, ..., b_{n-1})
        return [n for n in range(1, self.length + 1) if b[n] >= running[n - 1] - tol]

    def exponent(self, n: Optional[int] = None) -> float:
        n = self.length if n is None else n
        return float(self.log_derivs[n] / n)

    def first_entry(self) -> Optional[int]:
        if self.region_itinerary is None or not np.any(self.region_itinerary):
            return None
        return int(np.argmax(self.region_itinerary))


def analyze_orbit(fmap: RationalMap, x, N: int, V: Optional[Region] = None, metric: str = "auto",
                  crit_tol: float = CRITICAL_TOL) -> OrbitAnalysis:
    """
    Orbit x, f(x), ..., f^N(x) with a(x, m) for m = 0..N.

    Raises:
        OrbitHitsCritical: some f^m(x), m < N, lies within crit_tol of Crit
    """
    points = fmap.iterate_array(np.array([as_complex(x)]), N)[:, 0]
    near = fmap.critical_distance_array(points[:N]) <= crit_tol
    if np.any(near):
        raise OrbitHitsCritical(int(np.argmax(near)))
    ld = fmap.log_derivative_array(points[:N], metric)
    prefix = np.concatenate([[0.0], np.cumsum(ld)])
    itinerary = V.contains_array(points) if V is not None else None
    return OrbitAnalysis(SpherePoint.from_complex(points[0]), N, points, prefix, itinerary)


def pliss_times(fmap: RationalMap, x, N: int, chi: float, tol: float = PLISS_TOL,
                metric: str = "auto") -> List[int]:
    """
    Pliss times n <= N of x at rate chi, by the running-maximum scan.

    Args:
        fmap: The map
        x: Starting point
        N: Orbit length
        chi: Rate (nats per iterate)
        tol: Slack on the defining inequality

    Returns:
        Sorted list of Pliss times

    Raises:
        OrbitHitsCritical
    """
    return analyze_orbit(fmap, x, N, metric=metric).pliss_times(chi, tol)


def pliss_times_bruteforce(fmap: RationalMap, x, N: int, chi: float, tol: float = PLISS_TOL,
                           metric: str = "auto") -> List[int]:
    """Direct O(N^2) check of a(x, n) - a(x, m) >= (n - m) chi for all m < n."""
    a = analyze_orbit(fmap, x, N, metric=metric).log_derivs
    times = []
    for n in range(1, N + 1):
        if all(a[n] - a[m] >= (n - m) * chi - tol for m in range(n)):
            times.append(n)
    return times


@dataclass
class SegmentSample:
    """Forward segments of sampled points of J whose start lies outside V."""

    exponents: np.ndarray
    avoiding: np.ndarray

    @property
    def count(self) -> int:
        return int(self.exponents.size)


def _segment_exponents(fmap: RationalMap, start, depth: int, sample_size: int, seed: int,
                       V: Optional[Region], metric: str) -> SegmentSample:
    sample = julia_sample_array(fmap, start, sample_size, seed)
    if V is not None:
        sample = sample[~V.contains_array(sample)]
    if sample.size == 0:
        raise EmptySample("no sampled point outside the region")
    orbits = fmap.iterate_array(sample, depth - 1)
    exponents = np.sum(fmap.log_derivative_array(orbits, metric), axis=0) / depth
    # avoiding: x, f(x), ..., f^{depth-1}(x) all outside V
    avoiding = ~np.any(V.contains_array(orbits), axis=0) if V is not None else np.ones(sample.size, dtype=bool)
    return SegmentSample(exponents, avoiding)


@dataclass
class ChiPlusEstimate:
    value: float
    samples: int
    depth: int

    def to_json(self):
        return {"value": self.value, "samples": self.samples, "depth": self.depth, "lower_estimate": True}


def chi_plus(fmap: RationalMap, V: Optional[Region], depth: int, sample_size: int, start,
             seed: int = 7, metric: str = "auto") -> ChiPlusEstimate:
    """
    Largest finite-time exponent a(x, depth) / depth over sampled x in J minus V.

    Only the starting point x is required to lie outside V; the segment may
    enter V afterwards.

    Args:
        fmap: The map
        V: Excluded region (None or empty for none)
        depth: Segment length
        sample_size: Number of Julia-set samples drawn
        start: A point of J to sample from
        seed: Sampling seed

    Returns:
        ChiPlusEstimate

    Raises:
        EmptySample: no sample outside V
    """
    segments = _segment_exponents(fmap, start, depth, sample_size, seed, V, metric)
    exponents = segments.exponents
    value = float(np.max(exponents[np.isfinite(exponents)])) if np.any(np.isfinite(exponents)) else float("-inf")
    logger.debug(f"chi_plus over {segments.count} segments of length {depth}: {value:.6f}")
    return ChiPlusEstimate(value, segments.count, depth)


def gap_property_check(fmap: RationalMap, sigma: ExceptionalSet, radius: float, bound: float, start,
                       depth: int = 20, sample_size: int = 1000, seed: int = 7,
                       metric: str = "auto", whole_segment: bool = False) -> Dict:
    """
    Finite-orbit exponents of sampled segments against a bound.

    By default a segment is judged when its starting point lies outside
    B(Σ, radius). With whole_segment=True only segments that stay outside
    B(Σ, radius) for all `depth` steps are judged. The count of such
    segments is reported either way.

    Returns:
        Report with the largest exponent, the bound, the judged and avoiding
        segment counts

    Raises:
        EmptySample: no sample starts outside B(Σ, radius), or none avoids it
            when whole_segment is set
    """
    V = Region.around(sigma.points, radius) if not sigma.is_empty else None
    segments = _segment_exponents(fmap, start, depth, sample_size, seed, V, metric)
    judged = segments.exponents[segments.avoiding] if whole_segment else segments.exponents
    if judged.size == 0:
        raise EmptySample(f"no sampled segment of length {depth} avoids B(Σ, {radius})")
    worst = float(np.max(judged))
    avoiding = int(np.count_nonzero(segments.avoiding))
    logger.debug(f"gap check: {segments.count} segments start outside, {avoiding} avoid the region")
    return {"max_exponent": worst, "bound": bound, "segments": int(judged.size),
            "starting_outside": segments.count, "avoiding": avoiding,
            "reading": "whole_segment" if whole_segment else "start_point",
            "depth": depth, "radius": radius, "ok": bool(worst <= bound)}


# ----------------------------------------------------------------------
# shadowing


@dataclass
class ShadowResult:
    """Outcome of the shadowing search; `orbit` is None when no shadow was found."""

    orbit: Optional[PeriodicOrbit] = None
    pliss_time: Optional[int] = None
    table: List[Tuple[int, float, float]] = field(default_factory=list)
    reason: Optional[str] = None
    candidates: int = 0

    @property
    def found(self) -> bool:
        return self.orbit is not None

    def to_json(self):
        return {
            "found": self.found,
            "orbit": self.orbit.to_json() if self.orbit else None,
            "pliss_time": self.pliss_time,
            "table": [{"j": j, "dist": d, "bound": b} for j, d, b in self.table],
            "reason": self.reason,
            "candidates": self.candidates,
        }


def _shadow_table(fmap: RationalMap, x_orbit: np.ndarray, p: complex, m: int, rate: float):
    p_orbit = fmap.iterate_array(np.array([p]), m)[:, 0]
    table = []
    slack = np.inf
    for j in range(SHADOW_START, m + 1):
        dist = float(chordal_distance(x_orbit[j], p_orbit[j]))
        bound = float(np.exp(-(m - j) * rate))
        table.append((j, dist, bound))
        slack = min(slack, bound - dist)
    return table, slack


def shadow_periodic(fmap: RationalMap, x, n: int, V: Optional[Region], eps: float, chi_plus_value: float,
                    catalog: Optional[OrbitCatalog] = None, extra_periods: int = 6,
                    metric: str = "auto") -> ShadowResult:
    """
    Find a periodic orbit shadowing x up to its last Pliss time.

    Requires the orbit x..f^n(x) to stay outside V and a(x, n)/n >= chi_plus - eps.
    With m the largest Pliss time at rate chi_plus - eps, candidates are Newton
    solutions of f^P(z) = z seeded at x for P = m..m + extra_periods plus the
    cataloged cycles. A candidate p passes when chi(p) >= chi_plus - eps and
    dist(f^j x, f^j p) <= exp(-(m - j)(chi_plus - eps)) for j = 4..m.

    Returns:
        ShadowResult; the passing candidate of smallest period (ties by slack),
        or a reason when none passes
    """
    V = V or Region.empty()
    rate = chi_plus_value - eps
    try:
        analysis = analyze_orbit(fmap, x, n, V, metric)
    except OrbitHitsCritical as e:
        return ShadowResult(reason=str(e))
    entry = analysis.first_entry()
    if entry is not None:
        return ShadowResult(reason=f"orbit enters the excluded region at step {entry}")
    if analysis.exponent() < rate:
        return ShadowResult(reason=f"exponent {analysis.exponent():.4f} below chi_plus - eps = {rate:.4f}")
    times = analysis.pliss_times(rate)
    if not times:
        return ShadowResult(reason="no Pliss time at rate chi_plus - eps")
    m = times[-1]
    x0 = as_complex(x)
    x_orbit = analysis.points

    candidates: List[Tuple[complex, int]] = []
    if not is_infinite(x0):
        for period in range(m, m + extra_periods + 1):
            z = newton_periodic(fmap, np.array([x0]), period, steps=40)[0]
            residual = float(chordal_distance(fmap.iterate_array(np.array([z]), period)[-1, 0], z))
            if residual <= 1e-9:
                candidates.append((z, period))
    if catalog is not None:
        for orbit in catalog.non_attracting():
            for value in orbit.point_array():
                candidates.append((value, orbit.period))

    best = None
    for z, period in candidates:
        minimal = exact_period(fmap, z, period, tol=1e-8) or period
        orbit = PeriodicOrbit.from_point(fmap, z, minimal)
        if orbit.exponent < rate:
            continue
        table, slack = _shadow_table(fmap, x_orbit, z, m, rate)
        if slack < 0:
            continue
        key = (minimal, -slack)
        if best is None or key < best[0]:
            best = (key, orbit, table)
    if best is None:
        return ShadowResult(pliss_time=m, reason="no candidate satisfies the shadowing bound",
                            candidates=len(candidates))
    return ShadowResult(best[1], m, best[2], None, len(candidates))


# ----------------------------------------------------------------------
# periodic points near exceptional critical preimages


@dataclass
class NearCriticalPoint:
    n: int
    point: Optional[SpherePoint]
    period: Optional[int]
    exponent: Optional[float]
    distance: Optional[float]
    radius: float
    error: Optional[str] = None

    def to_json(self):
        return {
            "n": self.n,
            "point": self.point.to_json() if self.point else None,
            "period": self.period,
            "exponent": self.exponent,
            "distance": self.distance,
            "radius": self.radius,
            "error": self.error,
        }


def _seeds_around(c: complex, r: float) -> np.ndarray:
    offsets = np.array([1, -1, 1j, -1j], dtype=complex)
    scales = np.array([1.0, 0.5, 2.0, 0.25])
    ring = (scales[:, None] * r * offsets[None, :]).reshape(-1)
    if is_infinite(c):
        return 1.0 / ring
    return c + ring


def periodic_near_critical(fmap: RationalMap, sigma: ExceptionalSet, c, n_list: Sequence[int],
                           extra_periods: int = 6) -> List[NearCriticalPoint]:
    """
    Periodic points q_n near c in f^-1(Σ+) minus Σ+ with exponents near chi_ess(c).

    For each n the target radius is r_n = exp(-n l chi(p) / D), with l the
    period of the cycle reached from c after k steps and D = deg_{f^k}(c).
    Newton on f^P(z) = z, P = k + n l .. k + n l + extra_periods, is seeded
    on rings around c; a root within 4 r_n of c is accepted.

    Returns:
        One record per n; failures carry the SeedDiverged message

    Raises:
        NotAnExceptionalPreimage: c is not in f^-1(Σ+) minus Σ+
    """
    cc = as_complex(c)
    plus = ExceptionalSet(points=list(sigma.sigma_plus))
    if sigma.contains(cc) or not plus.contains(fmap.evaluate(cc)):
        raise NotAnExceptionalPreimage(f"{SpherePoint.from_complex(cc)} is not in f^-1(Σ+) minus Σ+")
    entry = next(e for e in critical_entries(fmap, sigma) if e.point.close_to(cc, 1e-7))
    k, ell, chi_p, D = entry.steps, entry.cycle.period, entry.cycle.exponent, entry.degree
    results = []
    for n in n_list:
        r = float(np.exp(-n * ell * chi_p / D))
        seeds = _seeds_around(cc, r)
        best = None
        for period in range(k + n * ell, k + n * ell + extra_periods + 1):
            roots = newton_periodic(fmap, seeds, period, steps=40)
            residual = chordal_distance(fmap.iterate_array(roots, period)[-1], roots)
            dist = chordal_distance(roots, cc)
            ok = (residual <= 1e-9) & (dist <= 4.0 * r)
            for z, dz in zip(roots[ok], dist[ok]):
                if best is None or dz < best[1]:
                    best = (z, float(dz), period)
            if best is not None:
                break
        if best is None:
            failure = SeedDiverged(f"Newton diverged from every seed for n = {n}")
            logger.warning(str(failure))
            results.append(NearCriticalPoint(n, None, None, None, None, r, f"{type(failure).__name__}: {failure}"))
            continue
        z, dz, period = best
        minimal = exact_period(fmap, z, period, tol=1e-8) or period
        orbit = PeriodicOrbit.from_point(fmap, z, minimal)
        results.append(NearCriticalPoint(n, SpherePoint.from_complex(z), minimal, orbit.exponent, dz, r))
    return results
