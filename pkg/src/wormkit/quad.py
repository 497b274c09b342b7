"""Quadrature engines.

Two kinds of integrals show up everywhere in this package:

* one-dimensional Fourier-type integrals over the real line whose integrands
  decay exponentially and may oscillate (the per-mode strip kernels), and
* volume integrals over the unbounded worm models, taken in the coordinates
  ``(x, y, s, theta)`` with ``w1 = x + iy`` and ``|w2|^2 = e^s``.

`integrate_line` is an adaptive composite Gauss-Legendre rule on dyadically
graded panels; `integrate_domain` is a tensor rule built from
:func:`wormkit.domains.domain_quadrature_grid`.  A crude Monte Carlo
integrator in the original complex coordinates is kept as an oracle.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, ConfigurationError

__all__ = [
    "QuadConfig",
    "IntegralResult",
    "gauss_legendre",
    "composite_rule",
    "integrate_line",
    "integrate_domain",
    "monte_carlo_domain",
]


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and resolution knobs for every numerical routine.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Targets for line integrals and the mode-sum stopping rule.
    panel_order : int
        Gauss-Legendre order per panel in `integrate_line`.
    line_truncation : float or None
        Fixed truncation ``T`` of the real line; ``None`` picks it from the
        decay rate.
    mode_cap : int
        Largest ``|j|`` allowed in a mode sum.
    volume_tol : float
        Relative target for refinement checks of volume integrals.
    seed : int
        Seed for every random draw (samplers, Monte Carlo oracle).
    domain_truncation : float or None
        Half-width ``X`` of the ``Re w1`` window of volume grids; ``None``
        means ``40 / nu_beta``.
    volume_order : int
        Gauss-Legendre nodes per panel in the ``x`` and ``y`` directions.
    volume_panel : float
        Target panel width in ``x`` and ``y``.
    s_nodes, theta_nodes : int
        Nodes in ``s = log|w2|^2`` and in ``arg w2``.
    kernel_order, kernel_panel : int, float
        Gauss-Legendre order and panel width of the fixed rules used for
        batched kernel evaluation.
    max_evaluations : int
        Integrand-evaluation budget of `integrate_line`.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    panel_order: int = 32
    line_truncation: float | None = None
    mode_cap: int = 60
    volume_tol: float = 1e-4
    seed: int = 0
    domain_truncation: float | None = None
    volume_order: int = 16
    volume_panel: float = 1.5
    s_nodes: int = 12
    theta_nodes: int = 128
    kernel_order: int = 16
    kernel_panel: float = 0.25
    max_evaluations: int = 400_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "volume_tol", "volume_panel", "kernel_panel"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.panel_order < 4 or self.volume_order < 4 or self.kernel_order < 4:
            raise ConfigurationError("Gauss-Legendre orders must be at least 4")
        if self.mode_cap < 1:
            raise ConfigurationError("mode_cap must be >= 1")
        if self.s_nodes < 2 or self.theta_nodes < 4:
            raise ConfigurationError("s_nodes >= 2 and theta_nodes >= 4 required")
        for name in ("line_truncation", "domain_truncation"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigurationError(f"{name} must be positive when given")
        if self.max_evaluations < 100:
            raise ConfigurationError("max_evaluations too small")

    def replace(self, **changes) -> "QuadConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    err_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.err_estimate >= 0:
            raise ValueError("err_estimate must be nonnegative")


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule on ``[-1, 1]`` (read-only)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_rule(edges, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite ``n``-point Gauss-Legendre rule on consecutive panels.

    >>> x, w = composite_rule([0.0, 1.0, 3.0], 4)
    >>> round(float(w.sum()), 12)
    3.0
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    t, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    nodes = (half[:, None] * (t + 1.0) + a[:, None]).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _dyadic_edges(h0: float, T: float) -> np.ndarray:
    right = [0.0, h0]
    while right[-1] < T:
        right.append(min(2.0 * right[-1], T))
    right = np.array(right)
    return np.concatenate([-right[:0:-1], right])


def _tail_bound(f, T: float, rate: float) -> float:
    # magnitude samples just inside +-T, extrapolated back to T, times 1/rate
    probe = T * np.linspace(1.0, 1.25, 9)
    vals = np.abs(np.asarray(f(np.concatenate([probe, -probe])), dtype=complex))
    scale = np.exp(rate * (np.concatenate([probe, probe]) - T))
    m = float(np.max(vals * scale))
    return 2.0 * m / rate


def integrate_line(f, decay_rate: float, cfg: QuadConfig | None = None) -> IntegralResult:
    """Adaptive integral of ``f`` over the real line.

    ``f`` must be vectorized (accept and return numpy arrays) and satisfy
    ``|f(xi)| <= C exp(-decay_rate |xi|)`` for large ``|xi|``.

    Panels start dyadically graded outward from the origin (``[0, h]``,
    ``[h, 2h]``, ``[2h, 4h]``, ...) and are bisected until the panel rule and
    the sum over its halves agree to the local share of the tolerance.
    The reported error is the sum of those disagreements plus the
    truncation tail bound.

    Raises
    ------
    ConfigurationError
        ``decay_rate <= 0``.
    AccuracyError
        The evaluation budget ran out; carries the best estimate.
    """
    cfg = cfg or QuadConfig()
    if not decay_rate > 0:
        raise ConfigurationError(f"decay_rate must be positive, got {decay_rate!r}")
    n = cfg.panel_order
    h0 = min(1.0, 1.0 / decay_rate)
    evals = 0

    if cfg.line_truncation is not None:
        T = float(cfg.line_truncation)
        tail = _tail_bound(f, T, decay_rate)
        evals += 18
    else:
        T = max(4.0 / decay_rate, h0)
        while True:
            tail = _tail_bound(f, T, decay_rate)
            evals += 18
            if tail < cfg.abs_tol / 10:
                break
            T *= 2.0
            if T > 2.0 ** 40:
                raise AccuracyError("integrand does not decay at the stated rate")

    edges = _dyadic_edges(h0, T)
    a, b = edges[:-1], edges[1:]

    def panel_sums(a, b):
        t, gw = gauss_legendre(n)
        half = 0.5 * (b - a)
        x = half[:, None] * (t + 1.0) + a[:, None]
        vals = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
        return (vals * (half[:, None] * gw)).sum(axis=1), x.size

    q, k = panel_sums(a, b)
    evals += k
    total_est = q.sum()
    accepted_val = 0j
    accepted_err = 0.0
    while a.size:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total_est))
        m = 0.5 * (a + b)
        ql, kl = panel_sums(a, m)
        qr, kr = panel_sums(m, b)
        evals += kl + kr
        refined = ql + qr
        diff = np.abs(refined - q)
        local = tol * (b - a) / (2.0 * T)
        ok = diff <= local
        accepted_val += refined[ok].sum()
        accepted_err += float(diff[ok].sum())
        bad = ~ok
        total_est = accepted_val + refined[bad].sum()
        if not bad.any():
            break
        if evals > cfg.max_evaluations:
            err = accepted_err + float(diff[bad].sum()) + tail
            raise AccuracyError(
                "integrate_line exceeded its evaluation budget",
                best_estimate=complex(total_est),
                err_estimate=err,
            )
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        q = np.concatenate([ql[bad], qr[bad]])
    return IntegralResult(complex(accepted_val), accepted_err + tail, evals)


def _integrate_on_grid(f, grid, structured: bool) -> tuple[complex, int]:
    total = 0j
    count = 0
    for chunk in grid.chunks():
        if structured:
            vals = f(chunk)
        else:
            vals = f(chunk.p1, chunk.p2)
        vals = np.broadcast_to(np.asarray(vals, dtype=complex), chunk.shape)
        total += np.sum(vals * chunk.weight)
        count += int(np.prod(chunk.shape))
    return complex(total), count


def integrate_domain(f, params, cfg: QuadConfig | None = None, *, structured: bool = False) -> IntegralResult:
    """Tensor-product integral of ``f`` over a truncated worm model.

    ``f(p1, p2)`` is evaluated on broadcastable arrays of the variant's own
    coordinates (for ``DBeta`` that is ``(e^{w1}, w2)``; the Jacobian is folded
    into the weights).  With ``structured=True`` ``f`` instead receives a
    :class:`wormkit.domains.GridChunk` and may exploit the uniform angular
    grid.

    The error estimate is the discrepancy against the same rule with half the
    panels in ``x``, ``y`` and half the ``s`` nodes.
    """
    from .domains import domain_quadrature_grid

    cfg = cfg or QuadConfig()
    fine = domain_quadrature_grid(params, cfg)
    coarse = domain_quadrature_grid(params, cfg, refinement=0.5)
    v_fine, n_fine = _integrate_on_grid(f, fine, structured)
    v_coarse, n_coarse = _integrate_on_grid(f, coarse, structured)
    if not (np.isfinite(v_fine.real) and np.isfinite(v_fine.imag)):
        raise AccuracyError("non-finite volume integral", best_estimate=v_fine)
    return IntegralResult(v_fine, abs(v_fine - v_coarse), n_fine + n_coarse)


def monte_carlo_domain(f, params, X: float, n: int, seed: int = 0) -> tuple[complex, float]:
    """Plain Monte Carlo over ``{|Re z1| < X}`` of a worm model.

    Samples uniformly in a bounding box of ``C^2`` and uses
    :func:`wormkit.domains.contains` as the indicator, so it shares no
    change of variables with `integrate_domain`.  Returns the estimate and
    its standard error.
    """
    from .domains import DomainParams, PointC2, Variant, contains

    rng = np.random.default_rng(seed)
    beta, mu = params.beta, params.mu
    R = np.exp(mu / 2.0)
    if params.variant is Variant.DBetaPrime:
        lo1 = np.array([-X, -beta])
        hi1 = np.array([X, beta])
    elif params.variant is Variant.DBeta:
        # |zeta1| in (e^-X, e^X), any argument
        lo1 = np.array([-np.exp(X), -np.exp(X)])
        hi1 = np.array([np.exp(X), np.exp(X)])
    else:
        raise ConfigurationError("Monte Carlo oracle supports DBeta and DBetaPrime only")
    box = np.prod(hi1 - lo1) * (2.0 * R) ** 2
    u = rng.random((n, 4))
    p1 = lo1[0] + (hi1[0] - lo1[0]) * u[:, 0] + 1j * (lo1[1] + (hi1[1] - lo1[1]) * u[:, 1])
    p2 = R * (2.0 * u[:, 2] - 1.0) + 1j * R * (2.0 * u[:, 3] - 1.0)
    ok = np.abs(p2) > 0
    inside = np.zeros(n, dtype=bool)
    inside[ok] = contains(params, None, PointC2(p1[ok], p2[ok]))
    if params.variant is Variant.DBeta:
        inside &= np.abs(np.log(np.abs(p1, where=p1 != 0, out=np.full(n, np.inf)))) < X
    vals = np.zeros(n, dtype=complex)
    if inside.any():
        vals[inside] = np.asarray(f(p1[inside], p2[inside]), dtype=complex)
    est = box * vals.mean()
    se = box * vals.std(ddof=1) / np.sqrt(n)
    return complex(est), float(se)
