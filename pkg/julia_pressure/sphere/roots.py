"""
Polynomial root finding for preimage and periodic-point computations.

Coefficients are ascending (c[0] + c[1] z + ...), matching
numpy.polynomial.polynomial. Batched solvers act on arrays of shape
(batch, degree + 1).
"""

import logging
from typing import List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

logger = logging.getLogger(__name__)


def trim(coeffs, rel_tol: float = 1e-13) -> np.ndarray:
    """
    Drop negligible leading (highest-power) coefficients.

    Args:
        coeffs: Ascending coefficient array
        rel_tol: Coefficients below rel_tol * max|c| count as zero

    Returns:
        Trimmed coefficient array (at least one entry)
    """
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    k = c.size - 1
    while k > 0 and abs(c[k]) <= rel_tol * scale:
        k -= 1
    return c[: k + 1].copy()


def companion_roots(coeffs) -> np.ndarray:
    """Roots of a single polynomial from the companion-matrix eigenvalues."""
    c = trim(coeffs)
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return P.polyroots(c).astype(complex)


def quadratic_roots(c0, c1, c2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both roots of c2 z^2 + c1 z + c0 without cancellation.

    Args:
        c0, c1, c2: Coefficient arrays (c2 nonzero)

    Returns:
        Tuple of root arrays
    """
    c0 = np.asarray(c0, dtype=complex)
    c1 = np.asarray(c1, dtype=complex)
    c2 = np.asarray(c2, dtype=complex)
    disc = np.sqrt(c1 * c1 - 4.0 * c2 * c0)
    sign = np.where((np.conj(c1) * disc).real >= 0.0, 1.0, -1.0)
    q = -0.5 * (c1 + sign * disc)
    with np.errstate(all="ignore"):
        r1 = q / c2
        r2 = np.where(q != 0, c0 / np.where(q != 0, q, 1.0), r1)
    return r1, r2


def durand_kerner(coeffs: np.ndarray, max_iter: int = 500, tol: float = 1e-14) -> np.ndarray:
    """
    Simultaneous (Weierstrass) iteration for a batch of polynomials.

    Args:
        coeffs: Array (batch, degree + 1), nonzero leading coefficients
        max_iter: Iteration cap
        tol: Relative step size at which a batch row counts as converged

    Returns:
        Roots array (batch, degree)
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    deg = coeffs.shape[1] - 1
    monic = coeffs / coeffs[:, -1:]
    radius = 1.0 + np.max(np.abs(monic[:, :-1]), axis=1)
    seeds = (0.4 + 0.9j) ** np.arange(deg)
    z = radius[:, None] * seeds[None, :]
    eye = np.eye(deg, dtype=bool)
    for _ in range(max_iter):
        value = _batch_polyval(monic, z)
        diff = z[:, :, None] - z[:, None, :]
        diff[:, eye] = 1.0
        denom = np.prod(diff, axis=2)
        with np.errstate(all="ignore"):
            step = value / denom
        step[~np.isfinite(step)] = 0.0
        z = z - step
        if np.all(np.abs(step) <= tol * (1.0 + np.abs(z))):
            break
    return z


def _batch_polyval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Horner evaluation of row-wise polynomials at row-wise points."""
    out = np.zeros_like(z)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        out = out * z + coeffs[:, k : k + 1]
    return out


def newton_polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 2) -> np.ndarray:
    """
    Newton steps on row-wise polynomials, kept only where they lower |p|.

    Args:
        coeffs: Array (batch, degree + 1)
        roots: Array (batch, k) of approximate roots
        steps: Number of Newton steps

    Returns:
        Polished roots
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    z = np.array(roots, dtype=complex, copy=True)
    deriv = coeffs[:, 1:] * np.arange(1, coeffs.shape[1])[None, :]
    finite = np.isfinite(z)
    for _ in range(steps):
        zf = np.where(finite, z, 0.0)
        value = _batch_polyval(coeffs, zf)
        slope = _batch_polyval(deriv, zf)
        with np.errstate(all="ignore"):
            candidate = zf - value / slope
        new_value = _batch_polyval(coeffs, np.where(np.isfinite(candidate), candidate, zf))
        better = finite & np.isfinite(candidate) & (np.abs(new_value) < np.abs(value))
        z = np.where(better, candidate, z)
    return z


def cluster_roots(roots, rel_tol: float = 1e-4) -> List[Tuple[complex, int]]:
    """
    Group numerically multiple roots.

    A root of multiplicity m is perturbed by about eps^(1/m), so clusters are
    formed greedily within rel_tol * max(1, |z|).

    Args:
        roots: Array of roots
        rel_tol: Relative clustering radius

    Returns:
        List of (cluster mean, multiplicity)
    """
    remaining = list(np.asarray(roots, dtype=complex))
    clusters: List[Tuple[complex, int]] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        radius = rel_tol * max(1.0, abs(seed))
        keep = []
        for r in remaining:
            if abs(r - seed) <= radius:
                members.append(r)
            else:
                keep.append(r)
        remaining = keep
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters
