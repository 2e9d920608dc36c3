"""
High-level analysis orchestration.

Combines the orbit catalog, exceptional set, pressure curve, spectrum,
conformal measures and Pliss-time analysis for the CLI subcommands.
"""

import logging
from typing import Dict, Optional

import numpy as np

from julia_pressure.analysis.conformal import (
    blowup_ratio,
    collect_tree,
    conformality_defect,
    mass_bounds_check,
    measure_from_levels,
    random_special_disks,
)
from julia_pressure.analysis.exceptional import (
    chi_ess_plus,
    critical_entries,
    degree_constant,
    detect_exceptional,
)
from julia_pressure.analysis.hyperbolic import (
    chi_plus,
    gap_property_check,
    periodic_near_critical,
    pliss_times,
    pliss_times_bruteforce,
    shadow_periodic,
)
from julia_pressure.analysis.pressure import (
    PressureCurve,
    assemble_curve,
    chi_sup_estimate,
    exclusion_robustness,
    hidden_tree_pressure,
)
from julia_pressure.analysis.spectrum import SpectrumCurve, exponent_range, spectrum_report
from julia_pressure.config import t_grid_from_config
from julia_pressure.errors import EmptySample, MapNotExceptional, NumericError
from julia_pressure.orbits.periodic import find_periodic_orbits
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import choose_basepoint, is_safe_point
from julia_pressure.sphere.point import SpherePoint, as_complex, set_point_tolerance
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

GAP_SLACK = 0.1
SHADOW_EPS = 0.05


class Pipeline:
    """Orchestrates the analysis modules for one map and one run configuration."""

    def __init__(self, fmap: RationalMap, config: Dict, family=None):
        """
        Initialize pipeline with its map and configuration.

        Args:
            fmap: RationalMap to analyse
            config: Merged run configuration (see config.load_config)
            family: NamedFamily the map was built from, if any
        """
        self.fmap = fmap
        self.config = config
        set_point_tolerance(config.get("point_tol", 1e-9))
        self.family = family
        self._catalog = None
        self._sigma = None
        self._basepoint = None
        self._curve = None

    # ------------------------------------------------------------------
    # shared, lazily computed state

    @property
    def catalog(self):
        if self._catalog is None:
            self._catalog = find_periodic_orbits(self.fmap, self.config["max_period"], seed=self.config["seed"])
        return self._catalog

    @property
    def sigma(self):
        if self._sigma is None:
            self._sigma = detect_exceptional(self.fmap, max_period=min(4, self.config["max_period"]),
                                             pool_depth=self.config["pool_depth"], catalog=self.catalog)
            logger.info(f"exceptional set: {[str(p) for p in self._sigma.points]}")
        return self._sigma

    def region(self, radius: Optional[float] = None) -> Region:
        """B(Σ, radius), empty for non-exceptional maps."""
        if self.sigma.is_empty:
            return Region.empty()
        return Region.around(self.sigma.points, radius or self.config["radius"])

    @property
    def start(self) -> complex:
        """A repelling cycle point, used to seed Julia-set sampling."""
        expanding = [o for o in self.catalog if o.classification == "expanding"]
        if not expanding:
            raise EmptySample(f"{self.fmap.name} has no expanding cycle up to period {self.catalog.max_period}")
        outside = [o for o in expanding if not self.sigma.contains(o.points[0])]
        return (outside or expanding)[0].points[0].to_complex()

    @property
    def basepoint(self) -> SpherePoint:
        if self._basepoint is None:
            given = self.config.get("basepoint")
            if given is not None:
                self._basepoint = SpherePoint.from_complex(given)
            else:
                self._basepoint = choose_basepoint(self.fmap, self.start, avoid=self.region(),
                                                   seed=self.config["seed"], horizon=self.config["depth"])
            logger.info(f"basepoint {self._basepoint}")
        return self._basepoint

    def curve(self) -> PressureCurve:
        if self._curve is None:
            self._curve = assemble_curve(
                self.fmap, self.basepoint, t_grid_from_config(self.config), self.region(),
                self.config["depth"], self.sigma, self.catalog,
                strict=self.config["strict_exclusion"], metric=self.config["metric"],
                workers=self.config["workers"], leaf_budget=self.config["leaf_budget"],
            )
        return self._curve

    # ------------------------------------------------------------------
    # subcommands

    def analyze(self) -> Dict:
        """Exceptional set, essential exponents, degree constant and chi_sup."""
        sigma = self.sigma
        entries = critical_entries(self.fmap, sigma)
        report = {
            "map": self.fmap.to_json(),
            "family": self.family.kind if self.family else None,
            "exceptional": sigma.to_json(),
            "chi_ess": [e.to_json() for e in entries],
            "degree_constant": degree_constant(self.fmap, sigma).to_json(),
            "chi_sup": chi_sup_estimate(self.fmap, sigma, self.catalog).to_json(),
            "cycles": self.catalog.to_json(),
        }
        if entries:
            report["chi_ess_plus"] = chi_ess_plus(self.fmap, sigma)
            near = []
            for entry in entries:
                if entry.cycle.classification != "expanding":
                    continue
                near.extend(r.to_json() for r in periodic_near_critical(self.fmap, sigma, entry.point, [1, 2, 3]))
            report["periodic_near_critical"] = near
        return report

    def pressure(self) -> Dict:
        """Pressure curve rows and the JSON summary carrying t_minus."""
        curve = self.curve()
        summary = curve.to_json()
        if curve.t_minus is None:
            summary.pop("t_minus")
        summary["robustness"] = self._exclusion_robustness()
        return {"curve": curve, "summary": summary}

    def _exclusion_robustness(self) -> Optional[Dict]:
        if self.sigma.is_empty:
            return None
        return exclusion_robustness(self.fmap, self.basepoint, -1.0, self.sigma, self.config["radius"],
                                    self.config["depth"], metric=self.config["metric"])

    def spectrum(self) -> SpectrumCurve:
        """Spectrum curve with its audit; maps without closed form are flagged."""
        curve = self.curve()
        gap = None
        if not self.sigma.is_empty:
            bound = exponent_range(curve, check=False).alpha_tilde_plus + GAP_SLACK
            try:
                gap = gap_property_check(self.fmap, self.sigma, self.config["radius"], bound, self.start,
                                         depth=self.config["segment_depth"],
                                         sample_size=self.config["sample_size"], seed=self.config["seed"],
                                         metric=self.config["metric"])
            except NumericError as e:
                logger.warning(f"gap property check failed: {e}")
        spectrum = spectrum_report(self.fmap, curve, self.sigma, self.config["alpha_points"], gap)
        closed = self.family.has_closed_form if self.family else False
        spectrum.audit["no_closed_form"] = not closed
        degree = degree_constant(self.fmap, self.sigma, spectrum.alpha_plus, spectrum.alpha_tilde_plus)
        spectrum.audit["degree_constant"] = degree.to_json()
        return spectrum

    def measure(self) -> Dict:
        """Patterson-Sullivan measure at measure_t with mass, defect and blow-up reports."""
        cfg = self.config
        t = cfg["measure_t"]
        V = self.region()
        z = self.basepoint
        hidden = hidden_tree_pressure(self.fmap, z, t, V, cfg["depth"], metric=cfg["metric"],
                                      workers=cfg["workers"], leaf_budget=cfg["leaf_budget"]).value
        p = hidden + cfg["pressure_gap"]
        levels = collect_tree(self.fmap, z, cfg["depth"], V, cfg["metric"], cfg["workers"], cfg["leaf_budget"])

        if self.sigma.is_empty:
            W_family = [Region.empty()]
        else:
            W_family = [self.region(cfg["radius"] * f) for f in (1.0, 0.5, 0.25)]
        measures = [measure_from_levels(levels, t, p, W, cfg["depth"], cfg["b_choice"], cfg["b_gamma"])
                    for W in W_family]
        report = {
            "t": t,
            "p": p,
            "hidden": hidden,
            "depth": cfg["depth"],
            "mass": mass_bounds_check(measures, W_family),
        }

        disks = random_special_disks(self.fmap, 5, 0.1, cfg["seed"], self.start, avoid=V.scaled(2.0),
                                     W=W_family[-1])
        report["defects"] = [
            {"disk": disk.to_json(),
             **conformality_defect(measures[-1], self.fmap, t, hidden, disk, W_family[-1], cfg["metric"]).to_json()}
            for disk in disks
        ]
        try:
            report["blowup"] = blowup_ratio(self.fmap, z, t, self.sigma, cfg["radius"], cfg["inner_radius"],
                                            max(2, cfg["depth"] - 4), cfg["depth"], gap=cfg["pressure_gap"],
                                            hidden=hidden, metric=cfg["metric"], workers=cfg["workers"])
        except MapNotExceptional:
            report["blowup"] = None
        report["atoms"] = measures[0]
        return report

    def pliss(self) -> Dict:
        """Pliss times of one orbit, the optional brute-force cross-check, and a shadowing attempt."""
        cfg = self.config
        x = cfg.get("pliss_x")
        x = as_complex(x) if x is not None else self.basepoint.to_complex()
        N = cfg["pliss_n"]
        V = self.region()
        estimate = None
        chi = cfg.get("pliss_chi")
        if chi is None:
            estimate = chi_plus(self.fmap, V if not V.is_empty else None, cfg["segment_depth"],
                                cfg["sample_size"], self.start, cfg["seed"], cfg["metric"])
            chi = estimate.value
        times = pliss_times(self.fmap, x, N, chi, metric=cfg["metric"])
        report = {
            "x": SpherePoint.from_complex(x).to_json(),
            "N": N,
            "chi": chi,
            "chi_plus": estimate.to_json() if estimate else None,
            "times": times,
            "safe": is_safe_point(self.fmap, x, horizon=max(N, 1)).to_json(),
        }
        if cfg.get("verify"):
            oracle = pliss_times_bruteforce(self.fmap, x, N, chi, metric=cfg["metric"])
            report["verify"] = {"bruteforce": oracle, "agree": oracle == times}
        if estimate is not None:
            shadow = shadow_periodic(self.fmap, x, N, V, SHADOW_EPS, estimate.value, catalog=self.catalog,
                                     metric=cfg["metric"])
            report["shadow"] = shadow.to_json()
        logger.info(f"{len(times)} Pliss times at rate {chi:.6f} along {N} iterates")
        return report

    def summary(self) -> Dict:
        """Run-level metadata stored alongside every output."""
        return {
            "map": self.fmap.to_json(),
            "family": self.family.kind if self.family else None,
            "sigma": [p.to_json() for p in self.sigma.points],
            "t_grid": [float(t) for t in np.asarray(t_grid_from_config(self.config))],
        }
