"""
Excluded regions: finite unions of closed chordal balls.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np

from julia_pressure.sphere.point import SpherePoint, as_complex, chordal_distance


@dataclass(frozen=True)
class Region:
    """A finite union of chordal balls {(center, radius)}; empty when no balls."""

    balls: Tuple[Tuple[complex, float], ...] = field(default_factory=tuple)

    @classmethod
    def empty(cls) -> "Region":
        return cls(())

    @classmethod
    def around(cls, points: Iterable, radius: float) -> "Region":
        """
        Union of balls of a common radius around the given points.

        Args:
            points: SpherePoints or complex numbers
            radius: Chordal radius (0 < radius <= 2)

        Returns:
            Region (empty when points is empty)
        """
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls(tuple((as_complex(p), float(radius)) for p in points))

    @property
    def is_empty(self) -> bool:
        return len(self.balls) == 0

    @property
    def centers(self) -> np.ndarray:
        return np.array([c for c, _ in self.balls], dtype=complex)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for _, r in self.balls], dtype=float)

    def contains_array(self, z) -> np.ndarray:
        """Membership mask for an array of points (INF encoding)."""
        z = np.asarray(z, dtype=complex)
        if self.is_empty:
            return np.zeros(z.shape, dtype=bool)
        dist = chordal_distance(z[..., None], self.centers)
        return np.any(dist <= self.radii, axis=-1)

    def contains(self, z) -> bool:
        return bool(self.contains_array(np.array([as_complex(z)]))[0])

    def distance_array(self, z) -> np.ndarray:
        """Chordal distance to the nearest center; +inf for the empty region."""
        z = np.asarray(z, dtype=complex)
        if self.is_empty:
            return np.full(z.shape, np.inf)
        return np.min(chordal_distance(z[..., None], self.centers), axis=-1)

    def union(self, other: "Region") -> "Region":
        return Region(self.balls + other.balls)

    def scaled(self, factor: float) -> "Region":
        """Same centers, radii multiplied by factor."""
        return Region(tuple((c, r * factor) for c, r in self.balls))

    def is_subset_of(self, other: "Region") -> bool:
        """Ball-wise inclusion test (sufficient, not necessary)."""
        for c, r in self.balls:
            if not any(float(chordal_distance(c, c2)) + r <= r2 + 1e-15 for c2, r2 in other.balls):
                return False
        return True

    def disjoint_from(self, other: "Region") -> bool:
        for c, r in self.balls:
            for c2, r2 in other.balls:
                if float(chordal_distance(c, c2)) <= r + r2:
                    return False
        return True

    def to_json(self) -> List[dict]:
        return [{"center": SpherePoint.from_complex(c).to_json(), "radius": r} for c, r in self.balls]
