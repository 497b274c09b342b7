"""Exhaustion exponents of the worm.

If ``-(-rho)^delta`` is plurisubharmonic near the boundary, the analysis
reduces to a positive function ``g`` on ``[-mu, mu]`` with

    g'' + delta^2 g <= 0,

which by Sturm comparison with ``cos(delta s)`` is possible only when
``mu delta < pi / 2``.  The sharp bound on the exponent is therefore
``pi / (2 mu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "ExhaustionQuery",
    "CosineWitness",
    "FeasibilityVerdict",
    "df_exponent_bound",
    "exhaustion_feasibility",
    "ode_positivity_check",
]

ODE_TOL = 1e-12


@dataclass(frozen=True)
class ExhaustionQuery:
    mu: float
    delta: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("mu must be positive")
        if not 0 < self.delta <= 1:
            raise DomainError("delta must lie in (0, 1]")


@dataclass(frozen=True)
class CosineWitness:
    """``g(s) = cos(k s)`` with analytic derivatives; ``k = 0`` is ``g = 1``."""

    k: float

    def __call__(self, s):
        return np.cos(self.k * np.asarray(s, dtype=float))

    def d2(self, s):
        return -self.k**2 * np.cos(self.k * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    margin: float
    witness: CosineWitness | None = None

    def __post_init__(self):
        if self.feasible != (self.margin > 0):
            raise ValueError("feasible must equal margin > 0")
        if self.feasible != (self.witness is not None):
            raise ValueError("a witness accompanies exactly the feasible verdicts")


def df_exponent_bound(mu: float) -> float:
    """``pi / (2 mu)``."""
    if not mu > 0:
        raise DomainError("mu must be positive")
    return math.pi / (2.0 * mu)


def exhaustion_feasibility(q: ExhaustionQuery) -> FeasibilityVerdict:
    """Decide ``mu delta < pi / 2`` and, when it holds, produce a witness.

    The witness ``cos((delta + eps) s)`` satisfies ``g'' + delta^2 g < 0``
    strictly and stays positive on ``[-mu, mu]`` because
    ``eps = margin / (2 mu)`` keeps ``(delta + eps) mu < pi / 2``.
    """
    margin = math.pi / 2 - q.mu * q.delta
    if not margin > 0:
        return FeasibilityVerdict(False, margin, None)
    eps = margin / (2.0 * q.mu)
    return FeasibilityVerdict(True, margin, CosineWitness(q.delta + eps))


def ode_positivity_check(delta: float, mu: float, g, grid_n: int = 1000) -> bool:
    """``g > 0`` and ``g'' + delta^2 g <= 1e-12`` on a uniform grid of ``[-mu, mu]``.

    ``g`` needs ``__call__`` and an analytic ``d2``; nothing is differenced.
    """
    if grid_n < 100:
        raise ConfigurationError("grid_n must be at least 100")
    if not (callable(g) and callable(getattr(g, "d2", None))):
        raise ConfigurationError("g must provide values and an analytic second derivative d2")
    s = np.linspace(-mu, mu, grid_n)
    try:
        v = np.asarray(g(s), dtype=float)
        v2 = np.asarray(g.d2(s), dtype=float)
    except Exception as exc:
        raise ConfigurationError(f"cannot evaluate g: {exc}") from exc
    if v.shape != s.shape or v2.shape != s.shape or not np.all(np.isfinite(v) & np.isfinite(v2)):
        raise ConfigurationError("g must return finite values on the grid")
    return bool(np.all(v > 0) and np.all(v2 + delta**2 * v <= ODE_TOL))
