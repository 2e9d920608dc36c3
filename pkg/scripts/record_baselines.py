#!/usr/bin/env python3
"""
Record or compare regression baselines for maps without a closed form.

Runs the pressure and spectrum pipeline for each map and stores the curves
as JSON. With --compare the stored values are checked against a fresh run
instead.

Usage:
    python scripts/record_baselines.py --out baselines
    python scripts/record_baselines.py --out baselines --compare --tol 1e-9
"""

import argparse
import json
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from julia_pressure.analysis.pipeline import Pipeline
from julia_pressure.config import load_config
from julia_pressure.sphere.families import build_family
from julia_pressure.storage.results import ResultStore, to_plain

# (file stem, family kind, parameters)
BASELINE_MAPS = [
    ("quadratic_c-1", "quadratic", {"c": -1.0}),
    ("lambda_4", "lambda", {"lam": 4.0}),
]


def compute_baseline(kind: str, params: dict, config: dict) -> dict:
    """
    Pressure and spectrum values for one map.

    Args:
        kind: Family kind
        params: Family parameters (d, c, lam)
        config: Run configuration

    Returns:
        Dictionary of plain values
    """
    family = build_family(kind, **params)
    pipeline = Pipeline(family.resolved, config, family)
    curve = pipeline.curve()
    spectrum = pipeline.spectrum()
    return to_plain({
        "map": family.resolved.to_json(),
        "t": curve.t_grid,
        "hidden": curve.hidden,
        "full": curve.full,
        "t_minus": curve.t_minus,
        "alpha": spectrum.alpha_grid,
        "F": spectrum.F_values,
        "alpha_minus": spectrum.alpha_minus,
        "alpha_tilde_plus": spectrum.alpha_tilde_plus,
    })


def max_difference(a, b) -> float:
    """Largest absolute difference between two nested value structures."""
    if isinstance(a, dict):
        return max((max_difference(a[k], b.get(k)) for k in a), default=0.0)
    if isinstance(a, list):
        if not isinstance(b, list) or len(a) != len(b):
            return float("inf")
        return max((max_difference(x, y) for x, y in zip(a, b)), default=0.0)
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return abs(a - b)
    return 0.0 if a == b else float("inf")


def main():
    parser = argparse.ArgumentParser(description="Record or compare regression baselines")
    parser.add_argument("--out", type=str, default="baselines", help="Baseline directory")
    parser.add_argument("--depth", type=int, default=None, help="Tree depth (default: JP_DEPTH)")
    parser.add_argument("--compare", action="store_true", help="Compare with stored baselines instead of writing")
    parser.add_argument("--tol", type=float, default=1e-9, help="Comparison tolerance")

    args = parser.parse_args()

    config = load_config()
    if args.depth is not None:
        config["depth"] = args.depth
    store = ResultStore(args.out, config)

    failures = 0
    for stem, kind, params in BASELINE_MAPS:
        print(f"Computing {stem}...")
        values = compute_baseline(kind, params, config)
        path = Path(args.out) / f"{stem}.json"
        if args.compare:
            if not path.exists():
                print(f"  Missing baseline: {path}")
                failures += 1
                continue
            stored = json.loads(path.read_text(encoding="utf-8"))
            stored.pop("config_hash", None)
            diff = max_difference(values, stored)
            status = "ok" if diff <= args.tol else "CHANGED"
            print(f"  {status}: max difference {diff:.3g}")
            failures += int(diff > args.tol)
        else:
            store.write_json(path.name, values)
            print(f"  Wrote {path}")

    if failures:
        print(f"\n{failures} baseline(s) differ")
        sys.exit(1)


if __name__ == "__main__":
    main()
