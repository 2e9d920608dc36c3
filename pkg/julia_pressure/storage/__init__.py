"""
Result persistence.
"""

from julia_pressure.storage.results import ResultStore, config_hash

__all__ = ["ResultStore", "config_hash"]
