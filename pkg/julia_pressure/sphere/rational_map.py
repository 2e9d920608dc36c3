"""
Rational maps of the Riemann sphere.

All evaluation goes through a chart: s = z for |z| <= 1 and s = 1/z
otherwise, with the degree-d reversed polynomials in the second chart, so
that points near infinity and poles never overflow.
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from julia_pressure.errors import ConfigError, NonConvergence
from julia_pressure.sphere.point import (
    INF,
    SpherePoint,
    as_complex,
    chordal_distance,
    is_infinite,
    log1p_abs2,
    normalize_infinity,
)
from julia_pressure.sphere.roots import (
    cluster_roots,
    companion_roots,
    durand_kerner,
    newton_polish,
    quadratic_roots,
    trim,
)

logger = logging.getLogger(__name__)

PointLike = Union[SpherePoint, complex, float]

PREIMAGE_RESIDUAL_TOL = 1e-10


def _pad(coeffs: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=complex)
    out[: coeffs.size] = coeffs
    return out


class RationalMap:
    """A rational map f = P/Q of degree d >= 2, immutable after construction."""

    def __init__(self, numerator: Sequence[complex], denominator: Sequence[complex] = (1.0,),
                 name: Optional[str] = None, crit_tol: float = 1e-6):
        """
        Initialize from ascending coefficient lists.

        Args:
            numerator: Coefficients of P, ascending powers
            denominator: Coefficients of Q, ascending powers
            name: Optional label used in reports
            crit_tol: Chordal tolerance for "is a critical point" tests

        Raises:
            ConfigError: degree below 2 or P, Q sharing a root
        """
        num = trim(numerator)
        den = trim(denominator)
        if not np.any(den):
            raise ConfigError("denominator is identically zero")
        self.degree = max(num.size - 1, den.size - 1)
        if self.degree < 2:
            raise ConfigError(f"map degree must be at least 2, got {self.degree}")
        self.name = name or "rational"
        self.crit_tol = crit_tol
        d = self.degree
        self.numerator = _pad(num, d + 1)
        self.denominator = _pad(den, d + 1)
        # w^d P(1/w) and w^d Q(1/w): charts at infinity
        self._num_rev = self.numerator[::-1].copy()
        self._den_rev = self.denominator[::-1].copy()
        self._num_d = P.polyder(self.numerator)
        self._den_d = P.polyder(self.denominator)
        self._num_rev_d = P.polyder(self._num_rev)
        self._den_rev_d = P.polyder(self._den_rev)
        self.is_polynomial = den.size == 1
        self._check_coprime(num, den)
        self._critical = self._find_critical_points()
        self._critical_array = np.array([c.to_complex() for c, _ in self._critical], dtype=complex)
        self._critical_degrees = np.array([m for _, m in self._critical], dtype=int)

    # ------------------------------------------------------------------
    # construction helpers

    def _check_coprime(self, num: np.ndarray, den: np.ndarray) -> None:
        small, other = (den, num) if den.size <= num.size else (num, den)
        if small.size <= 1:
            return
        scale = np.sum(np.abs(other))
        for r in companion_roots(small):
            weight = max(1.0, abs(r)) ** (other.size - 1)
            if abs(P.polyval(r, other)) <= 1e-10 * scale * weight:
                raise ConfigError(f"numerator and denominator share the root {r:.6g}")

    def _find_critical_points(self) -> List[Tuple[SpherePoint, int]]:
        d = self.degree
        wronskian = P.polysub(P.polymul(self._num_d, self.denominator),
                              P.polymul(self.numerator, self._den_d))
        wronskian = trim(wronskian, rel_tol=1e-12)
        found: List[Tuple[SpherePoint, int]] = []
        finite_count = 0
        worst = 0.0
        if wronskian.size > 1:
            scale = np.sum(np.abs(wronskian))
            for center, mult in cluster_roots(companion_roots(wronskian)):
                weight = max(1.0, abs(center)) ** (wronskian.size - 1)
                residual = abs(P.polyval(center, wronskian)) / (scale * weight)
                worst = max(worst, residual)
                found.append((SpherePoint(center), mult + 1))
                finite_count += mult
            if worst > 1e-6:
                raise NonConvergence("critical point root finder", worst)
        at_infinity = (2 * d - 2) - finite_count
        if at_infinity > 0:
            found.append((SpherePoint.infinity(), at_infinity + 1))
        logger.debug(f"{self.name}: critical points {found}")
        return found

    # ------------------------------------------------------------------
    # chart machinery

    def _chart_parts(self, z: np.ndarray):
        """Chart coordinate s, chart flag, and N, D, N', D' at s."""
        z = np.asarray(z, dtype=complex)
        inf = is_infinite(z)
        with np.errstate(all="ignore"):
            big = inf | (np.abs(z) > 1.0)
            s = np.where(big & ~inf, 1.0 / np.where(big & ~inf, z, 1.0), z)
        s = np.where(inf, 0.0, s)
        N = np.empty_like(s)
        D = np.empty_like(s)
        dN = np.empty_like(s)
        dD = np.empty_like(s)
        lo = ~big
        N[lo] = P.polyval(s[lo], self.numerator)
        D[lo] = P.polyval(s[lo], self.denominator)
        dN[lo] = P.polyval(s[lo], self._num_d)
        dD[lo] = P.polyval(s[lo], self._den_d)
        N[big] = P.polyval(s[big], self._num_rev)
        D[big] = P.polyval(s[big], self._den_rev)
        dN[big] = P.polyval(s[big], self._num_rev_d)
        dD[big] = P.polyval(s[big], self._den_rev_d)
        return s, big, N, D, dN, dD

    # ------------------------------------------------------------------
    # evaluation

    def evaluate_array(self, z) -> np.ndarray:
        """Vectorised f(z) with INF encoding."""
        _, _, N, D, _, _ = self._chart_parts(z)
        with np.errstate(all="ignore"):
            out = np.where(D != 0, N / np.where(D != 0, D, 1.0), INF)
        return normalize_infinity(out)

    def evaluate(self, z: PointLike) -> SpherePoint:
        """
        Evaluate f at a point of the sphere.

        Args:
            z: Point (SpherePoint, complex, or real)

        Returns:
            f(z) as a SpherePoint
        """
        value = self.evaluate_array(np.array([as_complex(z)]))[0]
        return SpherePoint.from_complex(value)

    def iterate(self, z: PointLike, n: int) -> List[SpherePoint]:
        """Forward orbit z, f(z), ..., f^n(z)."""
        current = np.array([as_complex(z)])
        orbit = [SpherePoint.from_complex(current[0])]
        for _ in range(n):
            current = self.evaluate_array(current)
            orbit.append(SpherePoint.from_complex(current[0]))
        return orbit

    def iterate_array(self, z, n: int) -> np.ndarray:
        """Forward orbits of an array of points, shape (n + 1,) + z.shape."""
        current = np.asarray(z, dtype=complex)
        out = np.empty((n + 1,) + current.shape, dtype=complex)
        out[0] = current
        for k in range(n):
            current = self.evaluate_array(current)
            out[k + 1] = current
        return out

    # ------------------------------------------------------------------
    # derivatives

    def resolve_metric(self, metric: str) -> str:
        """Map "auto" to planar for polynomials and spherical otherwise."""
        if metric == "auto":
            return "planar" if self.is_polynomial else "spherical"
        if metric not in ("planar", "spherical"):
            raise ConfigError(f"Unknown metric: {metric}")
        return metric

    def log_derivative_array(self, z, metric: str = "auto") -> np.ndarray:
        """
        Vectorised log|f'(z)| in nats; -inf at critical points.

        The spherical variant is log(|f'(z)| (1+|z|^2) / (1+|f(z)|^2)). The
        planar variant falls back to the spherical value where z or f(z) is
        infinity.

        Args:
            z: Points (INF encoding)
            metric: "planar", "spherical", or "auto"

        Returns:
            Array of log-derivatives
        """
        metric = self.resolve_metric(metric)
        z = np.asarray(z, dtype=complex)
        s, _, N, D, dN, dD = self._chart_parts(z)
        with np.errstate(all="ignore"):
            wron = np.abs(dN * D - N * dD)
            spherical = np.log(wron) + np.log1p((s * np.conj(s)).real) - np.log(
                (N * np.conj(N)).real + (D * np.conj(D)).real
            )
        if metric == "spherical":
            return spherical
        fz = self.evaluate_array(z)
        with np.errstate(all="ignore"):
            planar = spherical - log1p_abs2(z) + log1p_abs2(fz)
        fallback = is_infinite(z) | is_infinite(fz)
        return np.where(fallback, spherical, planar)

    def derivative_array(self, z) -> np.ndarray:
        """Planar complex derivative f'(z); nan at infinity, inf at poles."""
        z = np.asarray(z, dtype=complex)
        s, big, N, D, dN, dD = self._chart_parts(z)
        with np.errstate(all="ignore"):
            g = (dN * D - N * dD) / (D * D)
            out = np.where(big, -s * s * g, g)
        return np.where(is_infinite(z), np.nan, out)

    def log_derivative(self, z: PointLike, metric: str = "auto") -> float:
        """
        log|f'(z)| at a single point.

        Args:
            z: Point of the sphere
            metric: "planar", "spherical", or "auto"

        Returns:
            Extended real (nats), -inf at critical points
        """
        return float(self.log_derivative_array(np.array([as_complex(z)]), metric)[0])

    def chart_derivative(self, z: PointLike, source_big: Optional[bool] = None,
                         target_big: Optional[bool] = None) -> complex:
        """
        Complex derivative of f between the charts at z and at f(z).

        The chart at a point is the identity when |.| <= 1 and 1/. otherwise;
        explicit flags pin the chart choice so that products around a cycle
        telescope to the multiplier.

        Args:
            z: Point of the sphere
            source_big: Use the 1/z chart at z (default: by |z| > 1)
            target_big: Use the 1/w chart at f(z) (default: by |f(z)| > 1)

        Returns:
            Complex derivative
        """
        zc = as_complex(z)
        inf = np.isinf(zc.real) or np.isinf(zc.imag)
        if source_big is None:
            source_big = inf or abs(zc) > 1.0
        s = 0j if inf else (1.0 / zc if source_big else zc)
        if source_big:
            num, den, dnum, dden = self._num_rev, self._den_rev, self._num_rev_d, self._den_rev_d
        else:
            num, den, dnum, dden = self.numerator, self.denominator, self._num_d, self._den_d
        N = P.polyval(s, num)
        D = P.polyval(s, den)
        wron = P.polyval(s, dnum) * D - N * P.polyval(s, dden)
        if target_big is None:
            target_big = D == 0 or abs(N) > abs(D)
        if target_big:
            return complex(-wron / (N * N))
        return complex(wron / (D * D))

    # ------------------------------------------------------------------
    # critical points

    def critical_points(self) -> List[Tuple[SpherePoint, int]]:
        """
        Critical points with local degrees; multiplicities sum to 2d - 2.

        Returns:
            List of (point, local_degree)
        """
        return list(self._critical)

    @property
    def critical_array(self) -> np.ndarray:
        return self._critical_array.copy()

    def critical_distance_array(self, z) -> np.ndarray:
        """Chordal distance from each point to the nearest critical point."""
        z = np.asarray(z, dtype=complex)
        if self._critical_array.size == 0:
            return np.full(z.shape, np.inf)
        dist = chordal_distance(z[..., None], self._critical_array)
        return np.min(dist, axis=-1)

    def local_degree(self, z: PointLike, tol: Optional[float] = None) -> int:
        """Local degree of f at z (1 away from the critical points)."""
        tol = self.crit_tol if tol is None else tol
        zc = as_complex(z)
        if self._critical_array.size == 0:
            return 1
        dist = chordal_distance(zc, self._critical_array)
        k = int(np.argmin(dist))
        return int(self._critical_degrees[k]) if dist[k] <= tol else 1

    def local_degree_iterate(self, z: PointLike, k: int) -> int:
        """
        Local degree of f^k at z: product of local degrees along z, ..., f^(k-1)(z).

        Args:
            z: Point of the sphere
            k: Number of iterates (k >= 1)

        Returns:
            Integer local degree
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        degree = 1
        for point in self.iterate(z, k - 1):
            degree *= self.local_degree(point)
        return degree

    # ------------------------------------------------------------------
    # preimages

    def preimages_array(self, w, check: bool = True) -> np.ndarray:
        """
        All d preimages of each target point, with multiplicity.

        Solves P(z) - w Q(z) = 0 for |w| <= 1 and Q(z) - P(z)/w = 0 otherwise.
        A drop of the polynomial degree means infinity is a preimage.

        Args:
            w: Target points (INF encoding)
            check: Verify chordal residuals |f(x) - w| after polishing

        Returns:
            Array of shape w.shape + (d,)

        Raises:
            NonConvergence: a residual stays above tolerance
        """
        w = np.asarray(w, dtype=complex)
        shape = w.shape
        flat = w.reshape(-1)
        d = self.degree
        inf = is_infinite(flat)
        with np.errstate(all="ignore"):
            big = inf | (np.abs(flat) > 1.0)
            u = np.where(big & ~inf, 1.0 / np.where(big & ~inf, flat, 1.0), 0.0)
        coeffs = np.where(
            big[:, None],
            self.denominator[None, :] - u[:, None] * self.numerator[None, :],
            self.numerator[None, :] - np.where(big, 0.0, flat)[:, None] * self.denominator[None, :],
        )
        scale = np.max(np.abs(coeffs), axis=1)
        regular = np.abs(coeffs[:, d]) > 1e-12 * scale
        roots = np.empty((flat.size, d), dtype=complex)
        idx = np.nonzero(regular)[0]
        if idx.size:
            c = coeffs[idx]
            if d == 2:
                r1, r2 = quadratic_roots(c[:, 0], c[:, 1], c[:, 2])
                roots[idx, 0] = r1
                roots[idx, 1] = r2
            else:
                roots[idx] = durand_kerner(c)
            roots[idx] = newton_polish(c, roots[idx])
        for i in np.nonzero(~regular)[0]:
            finite = companion_roots(coeffs[i])
            row = np.full(d, INF, dtype=complex)
            row[: finite.size] = finite
            roots[i] = row
        roots = normalize_infinity(roots)
        if check:
            images = self.evaluate_array(roots)
            residual = chordal_distance(images, flat[:, None])
            worst = float(np.max(residual)) if residual.size else 0.0
            if worst > PREIMAGE_RESIDUAL_TOL:
                raise NonConvergence("preimage polishing", worst)
        return roots.reshape(shape + (d,))

    def preimages(self, w: PointLike) -> List[SpherePoint]:
        """
        The d solutions of f(z) = w, counted with multiplicity.

        Args:
            w: Target point

        Returns:
            List of d SpherePoints
        """
        row = self.preimages_array(np.array([as_complex(w)]))[0]
        return [SpherePoint.from_complex(x) for x in row]

    # ------------------------------------------------------------------

    def to_json(self):
        """Coefficient form for reports: pairs (re, im), ascending."""
        return {
            "name": self.name,
            "degree": self.degree,
            "num": [[c.real, c.imag] for c in self.numerator],
            "den": [[c.real, c.imag] for c in self.denominator],
        }

    def __repr__(self) -> str:
        return f"RationalMap({self.name}, degree={self.degree})"
