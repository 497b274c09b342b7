"""Worm domains: parameters, defining functions, Levi forms, and grids.

Four variants share the parameter ``beta > pi/2`` (``mu = beta - pi/2``):

``SmoothWorm``
    ``|z1 - e^{i log|z2|^2}|^2 < 1 - eta(log|z2|^2)`` for a convex profile
    ``eta`` vanishing exactly on ``[-mu, mu]``.
``TruncatedWorm``
    ``|z1 - e^{i log|z2|^2}|^2 < 1`` and ``|log|z2|^2| < mu``.
``DBeta``
    ``Re(z1 e^{-i log|z2|^2}) > 0`` and ``|log|z2|^2| < mu``.
``DBetaPrime``
    ``|Im z1 - log|z2|^2| < pi/2`` and ``|log|z2|^2| < mu``.

``(z1, z2) -> (e^{z1}, z2)`` maps ``DBetaPrime`` biholomorphically onto
``DBeta``.

Throughout, ``rho = |z1 - e^{iL}|^2 - 1 + eta(L)`` with ``L = log|z2|^2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError, SingularityError
from .quad import QuadConfig, composite_rule, gauss_legendre

__all__ = [
    "Variant",
    "DomainParams",
    "EtaProfile",
    "PointC2",
    "TangentVector",
    "contains",
    "rho",
    "rho_gradient",
    "real_gradient_norm",
    "complex_hessian",
    "levi_form",
    "tangential_levi_form",
    "annulus_contains",
    "map_prime_to_unprime",
    "map_unprime_to_prime",
    "project_to_boundary",
    "sample_boundary",
    "sample_annulus",
    "sample_interior",
    "GridChunk",
    "QuadGrid",
    "domain_quadrature_grid",
]

BOUNDARY_TOL = 1e-10


class Variant(enum.Enum):
    SmoothWorm = "smooth"
    TruncatedWorm = "truncated"
    DBeta = "dbeta"
    DBetaPrime = "dbeta-prime"


@dataclass(frozen=True)
class DomainParams:
    """Winding parameter ``beta`` and the exponents derived from it."""

    beta: float
    variant: Variant = Variant.DBetaPrime

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > math.pi / 2):
            raise DomainError(f"beta must exceed pi/2, got {self.beta!r}")
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def mu(self) -> float:
        return self.beta - math.pi / 2

    @property
    def nu(self) -> float:
        return math.pi / (2.0 * self.beta - math.pi)

    def with_variant(self, variant) -> "DomainParams":
        return DomainParams(self.beta, Variant(variant))


def _default_eta(mu: float, a: float, power: int):
    width = a - mu

    def eta(x):
        t = np.maximum(np.abs(x) - mu, 0.0) / width
        return t**power

    def d1(x):
        t = np.maximum(np.abs(x) - mu, 0.0) / width
        return np.sign(x) * power * t ** (power - 1) / width

    def d2(x):
        t = np.maximum(np.abs(x) - mu, 0.0) / width
        return power * (power - 1) * t ** (power - 2) / width**2

    return eta, d1, d2


@dataclass(frozen=True)
class EtaProfile:
    """Cap profile of the smooth worm.

    The default is ``((|x| - mu)_+ / (a - mu))^power``: even, convex, zero
    exactly on ``[-mu, mu]``, equal to 1 at ``|x| = a`` with nonzero slope
    there, and ``C^{power-1}``.  Any other profile can be supplied through
    ``funcs = (eta, eta', eta'')``.
    """

    mu: float
    a: float
    power: int = 4
    funcs: tuple[Callable, Callable, Callable] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigurationError("mu must be positive")
        if not self.a > self.mu:
            raise ConfigurationError("a must exceed mu")
        if self.funcs is None:
            if self.power < 3:
                raise ConfigurationError("power must be >= 3 for a C^2 boundary")
            object.__setattr__(self, "funcs", _default_eta(self.mu, self.a, self.power))

    @classmethod
    def default(cls, beta: float, cap: float = 1.0) -> "EtaProfile":
        mu = beta - math.pi / 2
        return cls(mu=mu, a=mu + cap)

    def __call__(self, x):
        return self.funcs[0](x)

    def d1(self, x):
        return self.funcs[1](x)

    def d2(self, x):
        return self.funcs[2](x)


@dataclass(frozen=True)
class PointC2:
    """A point (or arrays of points) of ``C^2``."""

    z1: complex
    z2: complex

    def __post_init__(self):
        object.__setattr__(self, "z1", _as_complex(self.z1))
        object.__setattr__(self, "z2", _as_complex(self.z2))

    def __iter__(self):
        yield self.z1
        yield self.z2

    def rotate(self, theta: float) -> "PointC2":
        """Image under ``(z1, z2) -> (z1, e^{i theta} z2)``."""
        return PointC2(self.z1, np.exp(1j * theta) * self.z2)


@dataclass(frozen=True)
class TangentVector:
    v1: complex
    v2: complex

    def __post_init__(self):
        object.__setattr__(self, "v1", _as_complex(self.v1))
        object.__setattr__(self, "v2", _as_complex(self.v2))

    def scaled(self, c: complex) -> "TangentVector":
        return TangentVector(c * self.v1, c * self.v2)


def _as_complex(v):
    if np.ndim(v) == 0:
        return complex(v)
    return np.asarray(v, dtype=complex)


def _log_mod2(z2):
    z2 = np.asarray(z2)
    if np.any(z2 == 0):
        raise DomainError("log singularity: z2 = 0")
    return np.log(np.abs(z2) ** 2)


def _scalarize(v):
    return v.item() if isinstance(v, np.ndarray) and v.ndim == 0 else v


def contains(params: DomainParams, eta: EtaProfile | None, p: PointC2):
    """Strict membership test; boundary points are outside.

    Works elementwise when ``p`` holds arrays.
    """
    L = _log_mod2(p.z2)
    z1 = np.asarray(p.z1)
    v = params.variant
    mu = params.mu
    if v is Variant.SmoothWorm:
        if eta is None:
            raise ConfigurationError("SmoothWorm membership needs an EtaProfile")
        inside = rho(eta, p) < 0
    elif eta is not None:
        raise ConfigurationError("an EtaProfile only applies to SmoothWorm")
    elif v is Variant.TruncatedWorm:
        inside = (np.abs(z1 - np.exp(1j * L)) ** 2 < 1.0) & (np.abs(L) < mu)
    elif v is Variant.DBeta:
        inside = (np.real(z1 * np.exp(-1j * L)) > 0) & (np.abs(L) < mu)
    else:
        inside = (np.abs(np.imag(z1) - L) < math.pi / 2) & (np.abs(L) < mu)
    return _scalarize(np.asarray(inside))


def rho(eta: EtaProfile, p: PointC2):
    """Defining function of the smooth worm (negative inside)."""
    L = _log_mod2(p.z2)
    return _scalarize(np.abs(np.asarray(p.z1) - np.exp(1j * L)) ** 2 - 1.0 + eta(L))


def rho_gradient(eta: EtaProfile, p: PointC2):
    """``(d rho/d z1, d rho/d z2)`` in the Wirtinger sense."""
    L = _log_mod2(p.z2)
    z1 = np.asarray(p.z1)
    z2 = np.asarray(p.z2)
    E = np.exp(1j * L)
    d1 = np.conj(z1) - np.conj(E)
    d2 = (-2.0 * np.imag(z1 * np.conj(E)) + eta.d1(L)) / z2
    return _scalarize(d1), _scalarize(d2)


def real_gradient_norm(eta: EtaProfile, p: PointC2):
    """Euclidean norm of the gradient of ``rho`` on ``R^4``.

    For a real function ``d/dx = 2 Re d/dz`` and ``d/dy = -2 Im d/dz``, so the
    real gradient has norm ``2 |(rho_1, rho_2)|``.
    """
    d1, d2 = rho_gradient(eta, p)
    return 2.0 * np.sqrt(np.abs(d1) ** 2 + np.abs(d2) ** 2)


def complex_hessian(eta: EtaProfile, p: PointC2):
    """The Levi matrix ``[[rho_11bar, rho_12bar], [rho_21bar, rho_22bar]]``."""
    L = _log_mod2(p.z2)
    z1 = np.asarray(p.z1)
    z2 = np.asarray(p.z2)
    Ebar = np.exp(-1j * L)
    h11 = np.ones_like(np.real(z1 * z2))
    h12 = 1j * Ebar / np.conj(z2)
    h22 = (2.0 * np.real(z1 * Ebar) + eta.d2(L)) / np.abs(z2) ** 2
    return h11, h12, np.conj(h12), h22


def levi_form(eta: EtaProfile, p: PointC2, v: TangentVector):
    """``sum rho_{j kbar} v_j conj(v_k)``; real."""
    h11, h12, _, h22 = complex_hessian(eta, p)
    v1, v2 = np.asarray(v.v1), np.asarray(v.v2)
    if np.any((v1 == 0) & (v2 == 0)):
        raise ConfigurationError("Levi form needs a nonzero vector")
    val = h11 * np.abs(v1) ** 2 + 2.0 * np.real(h12 * v1 * np.conj(v2)) + h22 * np.abs(v2) ** 2
    return _scalarize(np.asarray(val))


def tangential_levi_form(eta: EtaProfile, p: PointC2):
    """Levi form on the unit complex tangent ``(rho_2, -rho_1)/|.|``."""
    d1, d2 = rho_gradient(eta, p)
    n = np.sqrt(np.abs(d1) ** 2 + np.abs(d2) ** 2)
    if np.any(n == 0):
        raise DomainError("critical point of rho: no complex tangent line")
    return levi_form(eta, p, TangentVector(d2 / n, -d1 / n))


def annulus_contains(mu: float, p: PointC2, atol: float = 1e-14):
    """Membership in ``{z1 = 0, |log|z2|^2| <= mu}``."""
    L = _log_mod2(p.z2)
    return _scalarize(np.asarray((np.abs(p.z1) <= atol) & (np.abs(L) <= mu)))


def map_prime_to_unprime(p: PointC2):
    """``(z1, z2) -> (e^{z1}, z2)`` together with its Jacobian ``e^{z1}``."""
    e = np.exp(np.asarray(p.z1))
    return PointC2(e, p.z2), _scalarize(e)


def map_unprime_to_prime(params: DomainParams, p: PointC2):
    """Inverse of `map_prime_to_unprime` on ``DBeta``.

    Uses the branch of ``log z1`` with ``Im log z1 - log|z2|^2`` in
    ``(-pi/2, pi/2)``.
    """
    z1 = np.asarray(p.z1)
    if np.any(z1 == 0):
        raise SingularityError("zeta1 = 0 has no preimage")
    L = _log_mod2(p.z2)
    arg = np.angle(z1)
    arg = arg + 2.0 * np.pi * np.round((L - arg) / (2.0 * np.pi))
    if np.any(np.abs(arg - L) >= math.pi / 2) or np.any(np.abs(L) >= params.mu):
        raise DomainError("point is not in D_beta: no admissible logarithm branch")
    return PointC2(_scalarize(np.log(np.abs(z1)) + 1j * arg), p.z2)


def project_to_boundary(eta: EtaProfile, p: PointC2, tol: float = 1e-13, max_iter: int = 50) -> PointC2:
    """Newton projection onto ``{rho = 0}`` along the real gradient."""
    z1 = np.array(p.z1, dtype=complex, copy=True)
    z2 = np.array(p.z2, dtype=complex, copy=True)
    for _ in range(max_iter):
        q = PointC2(z1, z2)
        r = np.asarray(rho(eta, q))
        if np.all(np.abs(r) < tol):
            break
        d1, d2 = rho_gradient(eta, q)
        # real gradient as a complex vector is 2 * conj(d rho / dz)
        g1, g2 = 2.0 * np.conj(d1), 2.0 * np.conj(d2)
        gg = np.abs(g1) ** 2 + np.abs(g2) ** 2
        z1 = z1 - r * g1 / gg
        z2 = z2 - r * g2 / gg
    return PointC2(_scalarize(z1), _scalarize(z2))


def sample_boundary(eta: EtaProfile, n: int, rng: np.random.Generator, exclude_annulus: bool = False) -> PointC2:
    """Random points of the smooth worm's boundary.

    Drawn from the slice parametrization ``z1 = e^{iL} + sqrt(1 - eta(L)) e^{i phi}``
    and polished by `project_to_boundary`.  With ``exclude_annulus`` the
    degenerate circle ``z1 = 0`` on ``|L| <= mu`` is avoided.
    """
    # |L| < a keeps 1 - eta > 0
    L = rng.uniform(-eta.a, eta.a, n) * (1 - 1e-9)
    phi = rng.uniform(0, 2 * np.pi, n)
    if exclude_annulus:
        # keep away from the point e^{iL} + e^{i phi} = 0 on the plateau
        phi = np.where(np.abs(L) <= eta.mu, L + np.pi + rng.choice([-1, 1], n) * rng.uniform(0.2, np.pi - 0.2, n), phi)
    theta = rng.uniform(0, 2 * np.pi, n)
    radius = np.sqrt(np.maximum(1.0 - eta(L), 0.0))
    z1 = np.exp(1j * L) + radius * np.exp(1j * phi)
    z2 = np.exp(L / 2 + 1j * theta)
    return project_to_boundary(eta, PointC2(z1, z2))


def sample_annulus(mu: float, n: int, rng: np.random.Generator) -> PointC2:
    L = rng.uniform(-mu, mu, n)
    theta = rng.uniform(0, 2 * np.pi, n)
    return PointC2(np.zeros(n, dtype=complex), np.exp(L / 2 + 1j * theta))


def sample_interior(params: DomainParams, n: int, rng: np.random.Generator, x_range: float = 3.0, margin: float = 0.1) -> PointC2:
    """Random points of ``DBeta`` or ``DBetaPrime`` at distance ``margin`` from the walls.

    For ``DBeta`` the points are the images of ``DBetaPrime`` samples.
    """
    mu = params.mu
    if mu <= margin:
        raise ConfigurationError("margin exceeds the half-width of the log|z2|^2 band")
    L = rng.uniform(-mu + margin, mu - margin, n)
    y = L + rng.uniform(-np.pi / 2 + margin, np.pi / 2 - margin, n)
    x = rng.uniform(-x_range, x_range, n)
    theta = rng.uniform(0, 2 * np.pi, n)
    p = PointC2(x + 1j * y, np.exp(L / 2 + 1j * theta))
    if params.variant is Variant.DBetaPrime:
        return p
    if params.variant is Variant.DBeta:
        return map_prime_to_unprime(p)[0]
    raise ConfigurationError("interior sampling supports DBeta and DBetaPrime only")


@dataclass(frozen=True)
class GridChunk:
    """A block of the tensor grid, as broadcastable arrays.

    ``x`` has shape ``(nx, 1, 1, 1)``, ``y`` ``(1, ny, 1, 1)``, ``s``
    ``(1, ny, ns, 1)`` and ``theta`` ``(1, 1, 1, nt)``.  ``p1, p2`` are the
    points in the variant's coordinates and ``weight`` the full volume weight.
    """

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    theta: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    weight: np.ndarray

    @property
    def shape(self):
        return np.broadcast_shapes(self.x.shape, self.y.shape, self.s.shape, self.theta.shape)

    @property
    def w1(self):
        """``w1 = x + iy`` in ``DBetaPrime`` coordinates."""
        return self.x + 1j * self.y


@dataclass(frozen=True)
class QuadGrid:
    """Tensor quadrature over ``{|x| < X} x {|y - s| < pi/2, |s| < mu} x circle``.

    Volume element in ``DBetaPrime``: ``dx dy (e^s / 2) ds dtheta``; for
    ``DBeta`` an extra ``e^{2x}`` (the squared Jacobian of ``e^{w1}``).
    """

    params: DomainParams
    x: np.ndarray
    wx: np.ndarray
    y: np.ndarray
    wy: np.ndarray
    s: np.ndarray  # (ny, ns)
    ws: np.ndarray  # (ny, ns), includes e^s / 2
    theta: np.ndarray
    wtheta: np.ndarray
    max_chunk: int = 2_000_000

    @property
    def shape(self):
        return (self.x.size, self.y.size, self.s.shape[1], self.theta.size)

    def total_weight(self) -> float:
        wxy = self.wx[:, None] * self.wy[None, :]
        if self.params.variant is Variant.DBeta:
            wxy = wxy * np.exp(2.0 * self.x)[:, None]
        return float(np.sum(wxy * self.ws.sum(axis=1)[None, :]) * self.wtheta.sum())

    def chunks(self):
        nx, ny, ns, nt = self.shape
        step = max(1, self.max_chunk // (ny * ns * nt))
        y = self.y[None, :, None, None]
        s = self.s[None, :, :, None]
        th = self.theta[None, None, None, :]
        w2 = np.exp(s / 2.0 + 1j * th)
        w_rest = self.wy[None, :, None, None] * self.ws[None, :, :, None] * self.wtheta[None, None, None, :]
        for i in range(0, nx, step):
            x = self.x[i : i + step, None, None, None]
            wx = self.wx[i : i + step, None, None, None]
            w1 = x + 1j * y
            if self.params.variant is Variant.DBeta:
                p1 = np.exp(w1)
                wx = wx * np.exp(2.0 * x)
            else:
                p1 = w1
            yield GridChunk(x, y, s, th, p1, w2, wx * w_rest)


def domain_quadrature_grid(params: DomainParams, cfg: QuadConfig | None = None, refinement: float = 1.0) -> QuadGrid:
    """Tensor Gauss-Legendre / trapezoid grid for ``DBeta`` or ``DBetaPrime``.

    ``y`` panels break at ``+-|beta - pi|`` where the length of the admissible
    ``s`` interval has kinks; ``theta`` uses the periodic trapezoid rule.
    ``refinement`` scales the number of ``x``/``y`` panels and ``s`` nodes.
    """
    cfg = cfg or QuadConfig()
    if params.variant not in (Variant.DBeta, Variant.DBetaPrime):
        raise ConfigurationError("quadrature grids exist for DBeta and DBetaPrime only")
    X = cfg.domain_truncation if cfg.domain_truncation is not None else 40.0 / params.nu
    beta, mu = params.beta, params.mu
    n = cfg.volume_order

    nxp = max(1, int(math.ceil(refinement * 2.0 * X / cfg.volume_panel)))
    x, wx = composite_rule(np.linspace(-X, X, nxp + 1), n)

    breaks = sorted({-beta, -abs(beta - math.pi), abs(beta - math.pi), beta})
    ys, wys = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        k = max(1, int(math.ceil(refinement * (hi - lo) / cfg.volume_panel)))
        yy, ww = composite_rule(np.linspace(lo, hi, k + 1), n)
        ys.append(yy)
        wys.append(ww)
    y = np.concatenate(ys)
    wy = np.concatenate(wys)

    ns = max(2, int(round(refinement * cfg.s_nodes)))
    t, w = gauss_legendre(ns)
    lo = np.maximum(y - math.pi / 2, -mu)
    hi = np.minimum(y + math.pi / 2, mu)
    half = 0.5 * (hi - lo)
    s = half[:, None] * (t + 1.0) + lo[:, None]
    ws = half[:, None] * w * np.exp(s) / 2.0

    nt = cfg.theta_nodes
    theta = 2.0 * np.pi * np.arange(nt) / nt
    wtheta = np.full(nt, 2.0 * np.pi / nt)
    return QuadGrid(params, x, wx, y, wy, s, ws, theta, wtheta)
