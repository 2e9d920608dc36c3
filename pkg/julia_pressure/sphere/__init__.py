"""
Riemann sphere arithmetic: points, root finding and rational maps.
"""

from julia_pressure.sphere.point import INF, SpherePoint, chordal_distance
from julia_pressure.sphere.rational_map import RationalMap
from julia_pressure.sphere.families import NamedFamily, build_family

__all__ = ["INF", "SpherePoint", "chordal_distance", "RationalMap", "NamedFamily", "build_family"]
