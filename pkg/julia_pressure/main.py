"""
Main entry point for the julia-pressure command line.

Parses the map and the run configuration, runs one analysis subcommand and
writes its CSV/JSON results.
"""

import argparse
import json
import sys
from typing import Dict, List, Optional, Tuple

from julia_pressure.config import load_config, validate_config
from julia_pressure.errors import ConfigError, NumericError
from julia_pressure.logger import setup_logger
from julia_pressure.processing.map_spec import MapSpecParser, parse_point

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def handle_error(error: Exception) -> Tuple[Dict, int]:
    """
    Format an error payload and pick the exit code.

    Args:
        error: ConfigError or NumericError raised by the run

    Returns:
        Tuple of (error_payload, exit_code)
    """
    code = EXIT_CONFIG if isinstance(error, ConfigError) else EXIT_NUMERIC
    payload = {"error": str(error), "type": type(error).__name__}
    report = getattr(error, "report", None)
    if report is not None and hasattr(report, "to_json"):
        payload["diagnostics"] = report.to_json()
    for attr in ("worst_residual", "requested", "budget", "step", "gap", "slope_change", "side"):
        if hasattr(error, attr):
            payload[attr] = getattr(error, attr)
    return (payload, code)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("map")
    source.add_argument("--map", help="map specification file")
    source.add_argument("--family", help="named family: power, chebyshev, quadratic, lambda")
    source.add_argument("--d", type=int, default=2, help="family degree")
    source.add_argument("--c", help="parameter of z^2 + c, as re or re,im")
    source.add_argument("--lambda", dest="lam", help="parameter of the lambda family, as re or re,im")

    run = common.add_argument_group("run")
    run.add_argument("--depth", type=int)
    run.add_argument("--t-min", type=float)
    run.add_argument("--t-max", type=float)
    run.add_argument("--t-step", type=float)
    run.add_argument("--alpha-points", type=int)
    run.add_argument("--radius", type=float, help="chordal radius of the neighbourhood of the exceptional set")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--max-period", type=int)
    run.add_argument("--out", help="output directory")
    run.add_argument("--strict-exclusion", action="store_true", default=None,
                     help="prune branches entering the neighbourhood instead of dropping leaves")
    run.add_argument("--metric", choices=("auto", "planar", "spherical"))
    run.add_argument("--basepoint", help="tree root as re,im")
    run.add_argument("--log-level")

    parser = argparse.ArgumentParser(prog="julia-pressure",
                                     description="Pressure, spectrum and conformal measures of rational maps")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="exceptional set, essential exponents, chi_sup")
    sub.add_parser("pressure", parents=[common], help="tree and hidden pressure curves, phase transition")
    sub.add_parser("spectrum", parents=[common], help="Lyapunov spectrum and its audit")
    measure = sub.add_parser("measure", parents=[common], help="truncated conformal measures")
    measure.add_argument("--t", dest="measure_t", type=float)
    measure.add_argument("--gap", dest="pressure_gap", type=float, help="p minus the hidden pressure")
    measure.add_argument("--inner-radius", type=float)
    pliss = sub.add_parser("pliss", parents=[common], help="Pliss hyperbolic times of one orbit")
    pliss.add_argument("--x", dest="pliss_x", help="orbit start as re,im")
    pliss.add_argument("--chi", dest="pliss_chi", type=float)
    pliss.add_argument("--pliss-n", type=int)
    pliss.add_argument("--verify", action="store_true", default=None, help="cross-check with the direct scan")
    return parser


def merge_config(config: Dict, args: argparse.Namespace) -> Dict:
    """CLI flags override environment configuration."""
    merged = dict(config)
    for key in ("depth", "t_min", "t_max", "t_step", "alpha_points", "radius", "seed", "workers",
                "max_period", "out", "strict_exclusion", "metric", "log_level", "measure_t",
                "pressure_gap", "inner_radius", "pliss_chi", "pliss_n", "verify"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.basepoint is not None:
        merged["basepoint"] = parse_point(args.basepoint)
    if getattr(args, "pliss_x", None) is not None:
        merged["pliss_x"] = parse_point(args.pliss_x)
    return merged


def run(command: str, pipeline, store) -> Dict:
    """Run one subcommand and write its outputs; returns the JSON payload."""
    if command == "analyze":
        payload = pipeline.analyze()
        store.write_json("analysis.json", payload)
    elif command == "pressure":
        result = pipeline.pressure()
        store.write_csv("pressure.csv", ("t", "hidden", "full", "convergence", "tree"), result["curve"].rows())
        payload = result["summary"]
        store.write_json("pressure.json", payload)
    elif command == "spectrum":
        spectrum = pipeline.spectrum()
        store.write_csv("spectrum.csv", ("alpha", "F"), spectrum.rows())
        payload = spectrum.to_json()
        store.write_json("spectrum.json", payload)
    elif command == "measure":
        payload = pipeline.measure()
        atoms = payload.pop("atoms")
        store.write_csv("atoms.csv", ("re", "im", "weight", "n"), atoms.rows())
        store.write_json("measure.json", payload)
    else:
        payload = pipeline.pliss()
        store.write_json("pliss.json", payload)
    return payload


def main(argv: Optional[List[str]] = None) -> int:
    """Run the julia-pressure command line; returns the exit code."""
    from julia_pressure.analysis.pipeline import Pipeline
    from julia_pressure.storage.results import ResultStore

    args = build_parser().parse_args(argv)
    config = load_config()
    logger = setup_logger("julia_pressure", args.log_level or config["log_level"])

    try:
        config = merge_config(config, args)
        parser = MapSpecParser()
        if args.map:
            fmap, family = parser.parse_file(args.map)
        elif args.family:
            fmap, family = parser.from_args(args.family, args.d, args.c, args.lam)
        else:
            raise ConfigError("give a map with --map FILE or --family NAME")

        is_valid, message = validate_config(config, fmap.degree)
        if not is_valid:
            raise ConfigError(message)

        logger.info(f"{args.command}: {fmap.name}, depth {config['depth']}")
        pipeline = Pipeline(fmap, config, family)
        store = ResultStore(config["out"], config)
        run(args.command, pipeline, store)
        return EXIT_OK

    except (ConfigError, NumericError) as e:
        payload, code = handle_error(e)
        logger.error(f"{payload['type']}: {payload['error']}")
        print(json.dumps(payload, sort_keys=True, default=str), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
