"""Angular Fourier modes on the worm models.

A holomorphic function on ``DBetaPrime`` splits as ``f = sum_j h_j(z1) z2^j``.
Integrating ``|z2|^{2j}`` over the fiber ``{|log|z2|^2| < mu,
|Im z1 - log|z2|^2| < pi/2}`` leaves a weight on the strip
``S = {|Im z1| < beta}``; up to a factor ``pi`` (see `fiber_measure`) it is

    lambda_j(y) = (chi_{pi/2} * [e^{(j+1) s} chi_mu(s)])(y),

whose two-sided Laplace transform has the closed form

    lambda_hat_j(xi) = int e^{-2 t xi} lambda_j(t) dt
                     = sinh(pi xi) sinh(2 mu (xi - c)) / (xi (xi - c)),
    c = (j + 1) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .quad import composite_rule, gauss_legendre

__all__ = [
    "WeightProfile",
    "lambda_weight",
    "lambda_hat",
    "log_lambda_hat",
    "lambda_hat_quadrature",
    "fiber_measure",
    "log_sinhc",
    "mode_project",
    "mode_coefficients",
    "mode_synthesize",
]

SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class WeightProfile:
    beta: float
    j: int

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > math.pi / 2):
            raise DomainError(f"beta must exceed pi/2, got {self.beta!r}")
        if int(self.j) != self.j:
            raise ConfigurationError("mode index must be an integer")
        object.__setattr__(self, "j", int(self.j))

    @property
    def mu(self) -> float:
        return self.beta - math.pi / 2

    @property
    def shift(self) -> float:
        """``c = (j + 1) / 2``, the second removable point of the transform."""
        return 0.5 * (self.j + 1)

    def support_breaks(self) -> list[float]:
        """Points where ``lambda_j`` is not smooth."""
        b = abs(self.beta - math.pi)
        return sorted({-self.beta, -b, b, self.beta})


def lambda_weight(w: WeightProfile, y):
    """Closed-form ``lambda_j(y)``; zero outside ``|y| < beta``."""
    y = np.asarray(y, dtype=float)
    mu = w.mu
    lo = np.maximum(y - math.pi / 2, -mu)
    hi = np.minimum(y + math.pi / 2, mu)
    k = w.j + 1
    with np.errstate(invalid="ignore", over="ignore"):
        if k == 0:
            v = hi - lo
        else:
            v = (np.exp(k * hi) - np.exp(k * lo)) / k
    out = np.where(lo < hi, v, 0.0)
    return out.item() if out.ndim == 0 else out


def log_sinhc(u):
    """``log(sinh(u) / u)`` for real or complex ``u``.

    Below ``|u| < 1e-3`` the 5-term Taylor series is used; elsewhere the
    exponent is split off so nothing overflows.  The imaginary part is only
    defined modulo ``2 pi``.
    """
    u = np.asarray(u)
    cplx = np.iscomplexobj(u)
    out = np.empty(u.shape, dtype=complex if cplx else float)
    small = np.abs(u) < SERIES_CUTOFF
    us = u[small]
    u2 = us * us
    out[small] = np.log1p(u2 / 6 + u2**2 / 120 + u2**3 / 5040 + u2**4 / 362880)
    ub = u[~small]
    if cplx:
        sg = np.where(ub.real >= 0, 1.0, -1.0)
        v = sg * ub
        # sinh(u)/u is even, so log(sinh(v)/v) with Re v >= 0 suffices
        out[~small] = v + np.log(-np.expm1(-2 * v)) - math.log(2) - np.log(v)
    else:
        a = np.abs(ub)
        out[~small] = a + np.log(-np.expm1(-2 * a)) - math.log(2) - np.log(a)
    return out


def log_lambda_hat(w: WeightProfile, xi):
    """``log lambda_hat_j(xi)``, real or complex ``xi``, overflow-free."""
    xi = np.asarray(xi)
    two_mu = 2.0 * w.mu
    c = w.shift
    val = (
        math.log(math.pi) + log_sinhc(math.pi * xi)
        + math.log(two_mu) + log_sinhc(two_mu * (xi - c))
    )
    return val.item() if val.ndim == 0 else val


def lambda_hat(w: WeightProfile, xi):
    """``sinh(pi xi) sinh(2 mu (xi - c)) / (xi (xi - c))`` with the removable
    points filled; strictly positive on the real line."""
    return np.exp(log_lambda_hat(w, xi))


def lambda_hat_quadrature(w: WeightProfile, xi, order: int = 48, panels: int = 4):
    """``int e^{-2 t xi} lambda_j(t) dt`` by Gauss-Legendre on the smooth pieces.

    An oracle for `lambda_hat`: it touches only `lambda_weight`.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    edges = []
    br = w.support_breaks()
    for lo, hi in zip(br[:-1], br[1:]):
        edges.extend(np.linspace(lo, hi, panels + 1)[:-1])
    edges.append(br[-1])
    t, wt = composite_rule(edges, order)
    lam = lambda_weight(w, t)
    # factor out the largest exponent per xi to keep sums in range
    expo = -2.0 * np.outer(xi, t)
    m = expo.max(axis=1, keepdims=True)
    s = (np.exp(expo - m) * (lam * wt)).sum(axis=1)
    return np.exp(m[:, 0]) * s


def fiber_measure(w: WeightProfile, y, order: int = 64):
    """``int |z2|^{2j} dA(z2)`` over the admissible annulus above ``Im z1 = y``.

    Computed by quadrature in ``r = |z2|`` as ``2 pi int r^{2j+1} dr``, with no
    reference to `lambda_weight`; analytically it equals ``pi lambda_j(y)``.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mu = w.mu
    lo = np.exp(0.5 * np.maximum(y - math.pi / 2, -mu))
    hi = np.exp(0.5 * np.minimum(y + math.pi / 2, mu))
    t, gw = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    r = half[:, None] * (t + 1.0) + lo[:, None]
    vals = 2.0 * math.pi * (r ** (2 * w.j + 1) * gw).sum(axis=1) * half
    return np.where(lo < hi, vals, 0.0)


def mode_coefficients(samples, radius: float = 1.0) -> np.ndarray:
    """All Laurent coefficients ``c_j`` of ``sum c_j z2^j`` from equispaced
    samples on ``|z2| = radius``; index ``j`` sits at position ``j mod N``."""
    samples = np.asarray(samples, dtype=complex)
    n = samples.shape[-1]
    c = np.fft.fft(samples, axis=-1) / n
    j = np.fft.fftfreq(n, 1.0 / n)
    return c / radius**j


def mode_project(samples, j: int, radius: float = 1.0) -> complex:
    """Coefficient of ``z2^j`` from ``N`` equispaced samples at angles
    ``2 pi k / N`` on ``|z2| = radius``.

    ``N >= 4 (|j| + 1)`` is required so that aliasing from nearby modes is
    excluded for the functions we project.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.shape[-1]
    if n < 4 * (abs(j) + 1):
        raise ConfigurationError(f"{n} samples cannot resolve mode {j}; need >= {4 * (abs(j) + 1)}")
    theta = 2.0 * math.pi * np.arange(n) / n
    c = (samples * np.exp(-1j * j * theta)).sum(axis=-1) / n
    c = c / radius**j
    return complex(c) if np.ndim(c) == 0 else c


def mode_synthesize(coeffs: dict[int, complex], n: int, radius: float = 1.0) -> np.ndarray:
    """Samples of ``sum_j c_j z2^j`` at ``n`` equispaced points of ``|z2| = radius``."""
    theta = 2.0 * math.pi * np.arange(n) / n
    z2 = radius * np.exp(1j * theta)
    out = np.zeros(n, dtype=complex)
    for j, c in sorted(coeffs.items()):
        out += c * z2**j
    return out
