"""
Forward and backward orbits: regions, periodic cycles, backward trees, sampling.
"""

from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.periodic import OrbitCatalog, PeriodicOrbit, find_periodic_orbits
from julia_pressure.orbits.tree import BackwardTree, backward_tree, iterate_levels
from julia_pressure.orbits.sampling import SafetyReport, choose_basepoint, is_safe_point, julia_sample

__all__ = [
    "Region",
    "OrbitCatalog",
    "PeriodicOrbit",
    "find_periodic_orbits",
    "BackwardTree",
    "backward_tree",
    "iterate_levels",
    "SafetyReport",
    "choose_basepoint",
    "is_safe_point",
    "julia_sample",
]
