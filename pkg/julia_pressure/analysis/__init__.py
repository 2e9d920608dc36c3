"""
Analysis modules: exceptional set, pressure, spectrum, hyperbolic times and conformal measures.
"""

from julia_pressure.analysis.exceptional import ExceptionalSet, chi_ess, degree_constant, detect_exceptional
from julia_pressure.analysis.pressure import (
    PressureCurve,
    assemble_curve,
    hidden_tree_pressure,
    phase_transition,
    tree_pressure,
)
from julia_pressure.analysis.spectrum import SpectrumCurve, exponent_range, legendre_F, spectrum_curve
from julia_pressure.analysis.hyperbolic import chi_plus, pliss_times, shadow_periodic
from julia_pressure.analysis.conformal import AtomicMeasure, conformality_defect, patterson_sullivan
from julia_pressure.analysis.pipeline import Pipeline

__all__ = [
    "ExceptionalSet",
    "chi_ess",
    "degree_constant",
    "detect_exceptional",
    "PressureCurve",
    "assemble_curve",
    "hidden_tree_pressure",
    "phase_transition",
    "tree_pressure",
    "SpectrumCurve",
    "exponent_range",
    "legendre_F",
    "spectrum_curve",
    "chi_plus",
    "pliss_times",
    "shadow_periodic",
    "AtomicMeasure",
    "conformality_defect",
    "patterson_sullivan",
    "Pipeline",
]
