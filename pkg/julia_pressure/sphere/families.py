"""
Built-in map families with known closed-form behaviour.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from julia_pressure.errors import ConfigError
from julia_pressure.sphere.rational_map import RationalMap

FAMILY_KINDS = ("power", "chebyshev", "quadratic", "lambda")


def chebyshev_coefficients(d: int) -> np.ndarray:
    """Coefficients of 2 T_d(z/2), the degree-d Chebyshev map with J = [-2, 2]."""
    prev = np.array([2.0])
    cur = np.array([0.0, 1.0])
    if d == 0:
        return prev
    for _ in range(d - 1):
        nxt = np.zeros(cur.size + 1)
        nxt[1:] = cur
        nxt[: prev.size] -= prev
        prev, cur = cur, nxt
    return cur


@dataclass
class NamedFamily:
    """A named family member together with its resolved RationalMap."""

    kind: str
    params: Dict[str, complex] = field(default_factory=dict)
    resolved: Optional[RationalMap] = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ConfigError(f"Unknown family: {self.kind}")
        if self.resolved is None:
            self.resolved = self._build()

    def _build(self) -> RationalMap:
        d = int(self.params.get("d", 2))
        if d < 2:
            raise ConfigError(f"family degree must be at least 2, got {d}")
        if self.kind == "power":
            num = np.zeros(d + 1, dtype=complex)
            num[d] = 1.0
            return RationalMap(num, [1.0], name=f"z^{d}")
        if self.kind == "chebyshev":
            return RationalMap(chebyshev_coefficients(d), [1.0], name=f"chebyshev{d}")
        if self.kind == "quadratic":
            c = complex(self.params.get("c", 0.0))
            return RationalMap([c, 0.0, 1.0], [1.0], name=f"z^2{c.real:+g}" if c.imag == 0 else f"z^2+({c})")
        lam = complex(self.params.get("lambda", 4.0))
        if lam == 0:
            raise ConfigError("lambda must be nonzero")
        # f(z) = 1 / (lam z^d - lam z^(d-1) + 1)
        den = np.zeros(d + 1, dtype=complex)
        den[0] = 1.0
        den[d - 1] = -lam
        den[d] = lam
        return RationalMap([1.0], den, name=f"f_lambda({lam.real:g},{d})")

    @classmethod
    def power(cls, d: int = 2) -> "NamedFamily":
        return cls("power", {"d": d})

    @classmethod
    def chebyshev(cls, d: int = 2) -> "NamedFamily":
        return cls("chebyshev", {"d": d})

    @classmethod
    def quadratic(cls, c: complex) -> "NamedFamily":
        return cls("quadratic", {"c": c, "d": 2})

    @classmethod
    def lambda_family(cls, lam: complex = 4.0, d: int = 2) -> "NamedFamily":
        return cls("lambda", {"lambda": lam, "d": d})

    @property
    def has_closed_form(self) -> bool:
        """Power maps and Chebyshev maps have closed-form pressure and spectrum."""
        return self.kind in ("power", "chebyshev")


def build_family(kind: str, d: int = 2, c: complex = 0.0, lam: complex = 4.0) -> NamedFamily:
    """
    Build a named family member from CLI-style parameters.

    Args:
        kind: One of power, chebyshev, quadratic, lambda
        d: Degree (power, chebyshev, lambda)
        c: Parameter of z^2 + c
        lam: Parameter of the (lam z^d - lam z^(d-1) + 1)^-1 family

    Returns:
        NamedFamily with its resolved map
    """
    if kind == "power":
        return NamedFamily.power(d)
    if kind == "chebyshev":
        return NamedFamily.chebyshev(d)
    if kind == "quadratic":
        return NamedFamily.quadratic(c)
    if kind == "lambda":
        return NamedFamily.lambda_family(lam, d)
    raise ConfigError(f"Unknown family: {kind}")
