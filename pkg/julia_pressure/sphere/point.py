"""
Points of the Riemann sphere and the chordal metric.

Vectorised code stores points as complex numpy arrays with the point at
infinity encoded as complex(inf, 0). SpherePoint is the scalar wrapper used
at API boundaries.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

INF = complex(np.inf, 0.0)

# Global point-equality tolerance in the chordal metric.
DEFAULT_TOL = 1e-9


def set_point_tolerance(tol: float) -> None:
    """
    Change the global point-equality tolerance.

    Args:
        tol: New chordal tolerance (must be positive)
    """
    global DEFAULT_TOL
    if tol <= 0:
        raise ValueError("point tolerance must be positive")
    DEFAULT_TOL = tol


def is_infinite(z) -> np.ndarray:
    """Mask of entries encoding the point at infinity."""
    z = np.asarray(z, dtype=complex)
    return np.isinf(z.real) | np.isinf(z.imag)


def normalize_infinity(z) -> np.ndarray:
    """Map overflowed or infinite entries onto the canonical INF encoding."""
    z = np.array(z, dtype=complex, copy=True)
    z[is_infinite(z)] = INF
    return z


def to_sphere(z) -> np.ndarray:
    """
    Stereographic projection onto the unit sphere in R^3.

    Uses the 1/z chart for |z| > 1 so that large values never square.

    Args:
        z: Complex scalar or array (INF allowed)

    Returns:
        Array of shape z.shape + (3,)
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,), dtype=float)
    inf = is_infinite(z)
    with np.errstate(all="ignore"):
        big = inf | (np.abs(z) > 1.0)
        s = np.where(big & ~inf, 1.0 / np.where(big & ~inf, z, 1.0), z)
        s = np.where(inf, 0.0, s)
    r2 = (s * np.conj(s)).real
    denom = 1.0 + r2
    out[..., 0] = 2.0 * s.real / denom
    out[..., 1] = np.where(big, -2.0 * s.imag, 2.0 * s.imag) / denom
    out[..., 2] = np.where(big, (1.0 - r2), (r2 - 1.0)) / denom
    return out


def chordal_distance(a, b) -> np.ndarray:
    """
    Chordal distance 2|a-b| / sqrt((1+|a|^2)(1+|b|^2)), values in [0, 2].

    Args:
        a: Complex scalar or array
        b: Complex scalar or array (broadcast against a)

    Returns:
        Array of distances
    """
    return np.linalg.norm(to_sphere(a) - to_sphere(b), axis=-1)


def planar_distance(a, b) -> np.ndarray:
    """Euclidean distance in the plane; infinite unless both points are infinity."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ia, ib = is_infinite(a), is_infinite(b)
    with np.errstate(all="ignore"):
        d = np.abs(a - b)
    d = np.where(ia | ib, np.inf, d)
    return np.where(ia & ib, 0.0, d)


def log1p_abs2(z) -> np.ndarray:
    """Stable log(1 + |z|^2); +inf at infinity."""
    z = np.asarray(z, dtype=complex)
    a = np.abs(z)
    with np.errstate(all="ignore"):
        small = np.log1p(a * a)
        large = 2.0 * np.log(a) + np.log1p(1.0 / (a * a))
    return np.where(a <= 1.0, small, large)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of the extended complex plane."""

    value: complex = 0j
    infinite: bool = False

    def __post_init__(self):
        if not self.infinite:
            v = complex(self.value)
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                raise ValueError(f"finite SpherePoint needs a finite coordinate, got {v}")
            object.__setattr__(self, "value", v)
        else:
            object.__setattr__(self, "value", INF)

    @classmethod
    def from_complex(cls, z: Union[complex, float, "SpherePoint"]) -> "SpherePoint":
        """Wrap a complex number; infinite or overflowed values become infinity."""
        if isinstance(z, SpherePoint):
            return z
        z = complex(z)
        if np.isinf(z.real) or np.isinf(z.imag):
            return cls(infinite=True)
        return cls(z)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(infinite=True)

    def to_complex(self) -> complex:
        return INF if self.infinite else self.value

    def chordal(self, other: "SpherePoint") -> float:
        return float(chordal_distance(self.to_complex(), as_complex(other)))

    def close_to(self, other, tol: float = None) -> bool:
        """Equality within the chordal tolerance (global default if tol is None)."""
        tol = DEFAULT_TOL if tol is None else tol
        return self.chordal(other) <= tol

    def __eq__(self, other) -> bool:
        if not isinstance(other, (SpherePoint, complex, float, int)):
            return NotImplemented
        return self.close_to(other)

    __hash__ = None

    def to_json(self):
        """JSON form: "inf" or [re, im]."""
        if self.infinite:
            return "inf"
        return [self.value.real, self.value.imag]

    def __repr__(self) -> str:
        if self.infinite:
            return "SpherePoint(inf)"
        return f"SpherePoint({self.value:.12g})"


def as_complex(z) -> complex:
    """Convert a SpherePoint, complex, or real number to the internal encoding."""
    if isinstance(z, SpherePoint):
        return z.to_complex()
    z = complex(z)
    if np.isinf(z.real) or np.isinf(z.imag):
        return INF
    return z


def as_array(points) -> np.ndarray:
    """Convert an iterable of points to a complex array in the internal encoding."""
    return np.array([as_complex(p) for p in points], dtype=complex)
