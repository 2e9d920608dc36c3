"""
Configuration management for julia-pressure.

Loads settings from environment variables or .env file.
"""

import os
from typing import Any, Dict, List, Tuple

from dotenv import load_dotenv

# spectrum slopes need three grid points
MIN_GRID_POINTS = 3


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        print(f"Warning: Invalid {name} value: {raw}, using default {default}")
        return default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        print(f"Warning: Invalid {name} value: {raw}, using default {default}")
        return default


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.lower() == "true"


def load_config() -> Dict[str, Any]:
    """
    Load configuration from environment variables.

    Returns:
        Dictionary with configuration settings.
    """
    # Load .env file if it exists
    load_dotenv()

    chi_raw = os.getenv("JP_PLISS_CHI")
    pliss_chi = None
    if chi_raw:
        try:
            pliss_chi = float(chi_raw)
        except ValueError:
            print(f"Warning: Invalid JP_PLISS_CHI value: {chi_raw}, using the chi_plus estimate")

    config = {
        "depth": _env_int("JP_DEPTH", 16),
        "t_min": _env_float("JP_T_MIN", -3.0),
        "t_max": _env_float("JP_T_MAX", 2.0),
        "t_step": _env_float("JP_T_STEP", 0.25),
        "alpha_points": _env_int("JP_ALPHA_POINTS", 41),
        "radius": _env_float("JP_RADIUS", 0.2),
        "seed": _env_int("JP_SEED", 7),
        "workers": _env_int("JP_WORKERS", 1),
        "max_period": _env_int("JP_MAX_PERIOD", 4),
        "pool_depth": _env_int("JP_POOL_DEPTH", 2),
        "leaf_budget": _env_int("JP_LEAF_BUDGET", 2_000_000),
        "point_tol": _env_float("JP_POINT_TOL", 1e-9),
        "metric": os.getenv("JP_METRIC", "auto"),  # "auto", "planar" or "spherical"
        "strict_exclusion": _env_bool("JP_STRICT_EXCLUSION", False),
        "pressure_gap": _env_float("JP_PRESSURE_GAP", 0.05),
        "b_choice": os.getenv("JP_B_CHOICE", "one"),  # "one" or "power"
        "b_gamma": _env_float("JP_B_GAMMA", 1.0),
        "inner_radius": _env_float("JP_INNER_RADIUS", 1e-12),
        "measure_t": _env_float("JP_MEASURE_T", -2.0),
        "pliss_n": _env_int("JP_PLISS_N", 50),
        "pliss_chi": pliss_chi,
        "sample_size": _env_int("JP_SAMPLE_SIZE", 2000),
        "segment_depth": _env_int("JP_SEGMENT_DEPTH", 20),
        "basepoint": None,
        "pliss_x": None,
        "verify": False,
        "out": os.getenv("JP_OUT", "results"),
        "log_level": os.getenv("LOG_LEVEL", "INFO"),
    }
    return config


def t_grid_from_config(config: Dict[str, Any]) -> List[float]:
    """
    Build the inverse-temperature grid [t_min, t_max] with step t_step.

    Args:
        config: Configuration dictionary

    Returns:
        Sorted list of grid values, endpoints included.
    """
    t_min, t_max, step = config["t_min"], config["t_max"], config["t_step"]
    count = int(round((t_max - t_min) / step)) + 1
    return [round(t_min + i * step, 12) for i in range(count)]


def validate_config(config: Dict[str, Any], degree: int = 2) -> Tuple[bool, str]:
    """
    Validate a merged run configuration.

    Args:
        config: Configuration dictionary (environment defaults plus CLI flags)
        degree: Degree of the map, used for the leaf budget

    Returns:
        Tuple of (is_valid, error_message)
    """
    if config["t_step"] <= 0:
        return (False, "t_step must be positive")
    if config["t_min"] >= config["t_max"]:
        return (False, "t_min must be smaller than t_max")
    grid = t_grid_from_config(config)
    if len(grid) < MIN_GRID_POINTS:
        return (False, f"t grid has {len(grid)} points, need at least {MIN_GRID_POINTS}; lower t_step")
    if config["alpha_points"] < 2:
        return (False, "alpha_points must be at least 2")
    if config["depth"] < 2:
        return (False, "depth must be at least 2")
    if config["radius"] <= 0:
        return (False, "radius must be positive")
    if config["inner_radius"] <= 0 or config["inner_radius"] >= config["radius"]:
        return (False, "inner_radius must lie in (0, radius)")
    if config["point_tol"] <= 0:
        return (False, "point_tol must be positive")
    if config["metric"] not in ("auto", "planar", "spherical"):
        return (False, f"Unknown metric: {config['metric']}")
    if config["b_choice"] not in ("one", "power"):
        return (False, f"Unknown b_choice: {config['b_choice']}")
    if config["workers"] < 1:
        return (False, "workers must be at least 1")
    if config["max_period"] < 1 or config["max_period"] > 12:
        return (False, "max_period must lie in 1..12")
    if degree ** config["depth"] > config["leaf_budget"]:
        return (False, f"depth {config['depth']} needs {degree ** config['depth']} leaves, "
                       f"budget is {config['leaf_budget']}")
    return (True, "")
