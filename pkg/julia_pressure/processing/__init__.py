"""
Map specification parsing.
"""

from julia_pressure.processing.map_spec import MapSpecParser, parse_point

__all__ = ["MapSpecParser", "parse_point"]
