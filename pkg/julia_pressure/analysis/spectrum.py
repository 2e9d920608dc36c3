"""
Legendre-Fenchel transform of the hidden pressure and the exponent range.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from julia_pressure.analysis.pressure import PressureCurve
from julia_pressure.errors import SlopeNotStabilized

logger = logging.getLogger(__name__)

SLOPE_TOL = 0.02
DEGENERATE_WIDTH = 0.05
TRANSITION_GAP = 0.05


@dataclass(frozen=True)
class OutOfRange:
    """alpha lies outside the exponent range: the infimum over t is -infinity."""

    alpha: float
    side: str
    slope: float

    def to_json(self):
        return {"out_of_range": True, "alpha": self.alpha, "side": self.side, "slope": self.slope}


def legendre_F(curve: PressureCurve, alpha: float, slope_tol: float = SLOPE_TOL) -> Union[float, OutOfRange]:
    """
    (1/alpha) min_t (hidden(t) + t alpha), refined by a parabola at the minimum.

    The minimum at a grid end counts as -infinity (OutOfRange) only when the
    outward slope of hidden(t) + t alpha exceeds slope_tol; smaller end
    slopes are finite-depth noise.

    Args:
        curve: PressureCurve
        alpha: Exponent (> 0)
        slope_tol: End-slope tolerance

    Returns:
        F value, or OutOfRange
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    t = curve.t_grid
    h = curve.hidden + t * alpha
    k = int(np.argmin(h))
    last = t.size - 1
    if k == 0 and t.size > 1:
        slope = (h[1] - h[0]) / (t[1] - t[0])
        if slope > slope_tol:
            return OutOfRange(float(alpha), "negative", float(slope))
        return float(h[0] / alpha)
    if k == last and t.size > 1:
        slope = (h[last] - h[last - 1]) / (t[last] - t[last - 1])
        if slope < -slope_tol:
            return OutOfRange(float(alpha), "positive", float(slope))
        return float(h[last] / alpha)
    if t.size < 3:
        return float(h[k] / alpha)
    a, b, c = np.polyfit(t[k - 1:k + 2], h[k - 1:k + 2], 2)
    value = h[k]
    if a > 0:
        value = min(value, c - b * b / (4.0 * a))
    return float(value / alpha)


def _end_slopes(curve: PressureCurve) -> np.ndarray:
    return np.diff(curve.hidden) / np.diff(curve.t_grid)


@dataclass
class ExponentRange:
    alpha_minus: float
    alpha_tilde_plus: float
    alpha_plus: float
    methods: Dict[str, str] = field(default_factory=dict)
    cross_check: Optional[float] = None
    stabilized: bool = True

    def to_json(self):
        return {
            "alpha_minus": self.alpha_minus,
            "alpha_tilde_plus": self.alpha_tilde_plus,
            "alpha_plus": self.alpha_plus,
            "methods": self.methods,
            "cross_check_difference": self.cross_check,
            "stabilized": self.stabilized,
        }


def exponent_range(curve: PressureCurve, slope_tol: float = SLOPE_TOL, check: bool = True) -> ExponentRange:
    """
    Exponent range from the end slopes of the hidden pressure.

    alpha_tilde_plus = -(slope at the negative end), alpha_minus = -(slope at
    the positive end), alpha_plus = chi_sup. alpha_tilde_plus is compared with
    the largest cycle exponent outside Σ.

    Args:
        curve: PressureCurve (at least three grid points)
        slope_tol: Allowed change between the last two slopes at each end
        check: Raise when an end slope has not settled

    Returns:
        ExponentRange

    Raises:
        SlopeNotStabilized: an end slope changes by slope_tol or more
    """
    slopes = _end_slopes(curve)
    if slopes.size < 2:
        raise ValueError("exponent range needs at least three grid points")
    neg_change = abs(slopes[1] - slopes[0])
    pos_change = abs(slopes[-1] - slopes[-2])
    stabilized = neg_change < slope_tol and pos_change < slope_tol
    if check and neg_change >= slope_tol:
        raise SlopeNotStabilized("negative", float(neg_change))
    if check and pos_change >= slope_tol:
        raise SlopeNotStabilized("positive", float(pos_change))
    alpha_tilde_plus = float(-slopes[0])
    alpha_minus = float(max(0.0, -slopes[-1]))
    cross = None
    detail = curve.chi_sup_detail
    if detail is not None and detail.outside_sigma is not None:
        cross = float(abs(detail.outside_sigma - alpha_tilde_plus))
    return ExponentRange(
        alpha_minus=alpha_minus,
        alpha_tilde_plus=alpha_tilde_plus,
        alpha_plus=float(curve.chi_sup),
        methods={"alpha_minus": "slope", "alpha_tilde_plus": "slope", "alpha_plus": "cycle-max"},
        cross_check=cross,
        stabilized=stabilized,
    )


@dataclass
class SpectrumCurve:
    """F on an alpha grid, the exponent range, and the audit."""

    alpha_grid: np.ndarray
    F_values: np.ndarray
    alpha_minus: float
    alpha_tilde_plus: float
    alpha_plus: float
    degenerate: bool
    F_zero: Optional[float] = None
    exponents: Optional[ExponentRange] = None
    audit: Dict = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(a), float(f)) for a, f in zip(self.alpha_grid, self.F_values)]

    def to_json(self):
        return {
            "alpha_minus": self.alpha_minus,
            "alpha_tilde_plus": self.alpha_tilde_plus,
            "alpha_plus": self.alpha_plus,
            "degenerate": self.degenerate,
            "F_zero": self.F_zero,
            "exponents": self.exponents.to_json() if self.exponents else None,
            "audit": self.audit,
        }


def _as_value(result) -> float:
    return float("nan") if isinstance(result, OutOfRange) else float(result)


def slope_point_alpha(curve: PressureCurve, i: int) -> float:
    """alpha = -dP/dt at grid index i by central (or one-sided) difference."""
    t, h = curve.t_grid, curve.hidden
    lo, hi = max(i - 1, 0), min(i + 1, t.size - 1)
    return float(-(h[hi] - h[lo]) / (t[hi] - t[lo]))


def spectrum_curve(curve: PressureCurve, alpha_points: int = 41, slope_tol: float = SLOPE_TOL) -> SpectrumCurve:
    """
    Evaluate F on linspace(alpha_minus, alpha_tilde_plus, alpha_points).

    A range narrower than 0.05 is reported as a degenerate spectrum at
    alpha* = -dP/dt at the grid point nearest t = 0.
    """
    try:
        exps = exponent_range(curve, slope_tol, check=True)
    except SlopeNotStabilized as e:
        logger.warning(f"{e}; exponent range reported unstabilised")
        exps = exponent_range(curve, slope_tol, check=False)
    width = exps.alpha_tilde_plus - exps.alpha_minus
    degenerate = width < DEGENERATE_WIDTH
    if degenerate:
        i0 = int(np.argmin(np.abs(curve.t_grid)))
        alpha_star = slope_point_alpha(curve, i0)
        grid = np.array([alpha_star])
    else:
        lo = max(exps.alpha_minus, 1e-9)
        grid = np.linspace(lo, exps.alpha_tilde_plus, alpha_points)
    values = np.array([_as_value(legendre_F(curve, a, slope_tol)) for a in grid])
    F_zero = None
    if exps.alpha_minus < 1e-3 and not degenerate:
        finite = np.isfinite(values)
        if np.any(finite):
            F_zero = float(values[finite][0])
    return SpectrumCurve(grid, values, exps.alpha_minus, exps.alpha_tilde_plus, exps.alpha_plus,
                         degenerate, F_zero, exps)


def level_set_bounds(curve: PressureCurve, alpha: float, beta: float, points: int = 21) -> Tuple[Optional[float], Optional[float]]:
    """
    Dimension bounds (min(F(alpha), F(beta)), max of F over [alpha, beta]).

    Returns None entries when an endpoint is out of range.
    """
    lo, hi = min(alpha, beta), max(alpha, beta)
    fa = _as_value(legendre_F(curve, lo))
    fb = _as_value(legendre_F(curve, hi))
    inner = np.array([_as_value(legendre_F(curve, q)) for q in np.linspace(lo, hi, points)])
    lower = None if not (np.isfinite(fa) and np.isfinite(fb)) else float(min(fa, fb))
    upper = float(np.nanmax(inner)) if np.any(np.isfinite(inner)) else None
    return lower, upper


def legendre_involution_check(curve: PressureCurve, spectrum: SpectrumCurve, tol: Optional[float] = None) -> Dict:
    """sup_alpha (alpha F(alpha) - t alpha) <= hidden(t) + tol for every grid t."""
    if tol is None:
        tol = 10.0 * float(np.max(curve.convergence)) + 1e-9
    finite = np.isfinite(spectrum.F_values)
    a = spectrum.alpha_grid[finite]
    aF = a * spectrum.F_values[finite]
    worst = -np.inf
    for t, h in zip(curve.t_grid, curve.hidden):
        if a.size:
            worst = max(worst, float(np.max(aF - t * a) - h))
    return {"worst_excess": worst if np.isfinite(worst) else None, "tolerance": tol,
            "ok": bool(not np.isfinite(worst) or worst <= tol)}


def slope_point_check(curve: PressureCurve, tol: float = 0.05) -> Dict:
    """At interior grid t, alpha = -dP/dt gives alpha F(alpha) = P(t) + t alpha."""
    records = []
    ok = True
    for i in range(1, curve.t_grid.size - 1):
        alpha = slope_point_alpha(curve, i)
        if alpha <= 0:
            continue
        F = legendre_F(curve, alpha)
        if isinstance(F, OutOfRange):
            continue
        expected = curve.hidden[i] + curve.t_grid[i] * alpha
        error = abs(alpha * F - expected)
        ok = ok and error <= tol
        records.append({"t": float(curve.t_grid[i]), "alpha": alpha, "error": float(error)})
    return {"ok": bool(ok), "checked": len(records),
            "worst_error": max((r["error"] for r in records), default=0.0)}


def concavity_check(spectrum: SpectrumCurve, tol: float = 1e-6) -> Dict:
    """alpha F(alpha) is concave on the alpha grid."""
    finite = np.isfinite(spectrum.F_values)
    aF = (spectrum.alpha_grid * spectrum.F_values)[finite]
    if aF.size < 3:
        return {"ok": True, "max_second_difference": None}
    second = aF[:-2] - 2.0 * aF[1:-1] + aF[2:]
    return {"ok": bool(np.all(second <= tol)), "max_second_difference": float(np.max(second))}


def spectrum_report(fmap, curve: PressureCurve, sigma, alpha_points: int = 41,
                    gap_check: Optional[Dict] = None) -> SpectrumCurve:
    """
    Spectrum with its internal-consistency audit.

    The audit lists degeneracy, the equivalence "t_minus exists iff
    chi_sup > alpha_tilde_plus and Σ nonempty", range ordering, F bounds,
    alpha F concavity, the involution and slope-point checks, and (when given)
    the sampled gap check.

    Args:
        fmap: The map
        curve: PressureCurve
        sigma: ExceptionalSet
        alpha_points: Alpha grid size
        gap_check: Result of hyperbolic.gap_property_check, if run

    Returns:
        SpectrumCurve with audit filled in
    """
    spectrum = spectrum_curve(curve, alpha_points)
    exps = spectrum.exponents
    predicted = (curve.chi_sup > exps.alpha_tilde_plus + TRANSITION_GAP) and not sigma.is_empty
    found = curve.t_minus is not None
    finite = spectrum.F_values[np.isfinite(spectrum.F_values)]
    tol = 10.0 * float(np.max(curve.convergence)) + 1e-6
    audit = {
        "degenerate": spectrum.degenerate,
        "slopes_stabilized": exps.stabilized,
        "transition_equivalence": {"t_minus_found": found, "predicted": bool(predicted),
                                   "holds": bool(found == predicted)},
        "range_ordered": bool(exps.alpha_minus <= exps.alpha_tilde_plus + tol
                              and exps.alpha_tilde_plus <= exps.alpha_plus + tol),
        "F_in_bounds": bool(np.all((finite >= -tol) & (finite <= 2.0 + tol))),
        "concavity": concavity_check(spectrum),
        "involution": legendre_involution_check(curve, spectrum),
        "slope_point": slope_point_check(curve),
    }
    if spectrum.degenerate:
        audit["alpha_star"] = float(spectrum.alpha_grid[0])
        audit["F_star"] = float(spectrum.F_values[0])
    if gap_check is not None:
        audit["gap_property"] = gap_check
    spectrum.audit = audit
    logger.info(f"{fmap.name}: spectrum on [{exps.alpha_minus:.4f}, {exps.alpha_tilde_plus:.4f}], "
                f"degenerate={spectrum.degenerate}")
    return spectrum
