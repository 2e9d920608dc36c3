"""
julia-pressure: thermodynamic formalism for rational maps on the Riemann sphere.

Computes exceptional sets, tree and hidden tree pressures, the Lyapunov
spectrum and truncated conformal measures, with a CLI that emits CSV/JSON.
"""

__version__ = "0.1.0"
