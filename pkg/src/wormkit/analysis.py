"""Numerical experiments on the worm-model kernels.

* reproducing-property residuals, per mode on the strip and for the full
  kernel on ``DBetaPrime``;
* the ``L^p`` range ``2/(1+nu) <= p <= 2/(1-nu)`` and trend scans of
  ``int |K_D(., zeta)|^p`` near ``omega1 = 0`` and ``omega1 = infinity``;
* exponent fits for the decay of ``H_{-1}`` along the strip and for the
  blowup of ``K_D`` as ``omega1 -> 0``;
* rotation invariance and singularity scans.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .domains import DomainParams, PointC2, Variant, domain_quadrature_grid, map_unprime_to_prime
from .errors import AccuracyError, ConfigurationError, DomainError
from .kernel import (
    C_NORM,
    NormCalibration,
    h_j,
    kernel_prime,
    kernel_unprime,
    kernel_unprime_array,
    mode_kernel_tensor,
    mode_series,
    mode_terms_separable,
)
from .modes import WeightProfile, fiber_measure
from .parallel import ordered_map
from .quad import IntegralResult, QuadConfig, composite_rule, gauss_legendre

__all__ = [
    "TestKind",
    "TestFunctionSpec",
    "ExponentFit",
    "Trend",
    "LpVerdict",
    "NuBetaRange",
    "reproduce_mode",
    "calibrate_c_norm",
    "reproducing_residual_mode",
    "reproduce_full",
    "reproducing_residual_full",
    "lp_bounded_range",
    "lp_blowup_scan",
    "fit_exponent",
    "decay_exponent_fit",
    "stroboscopic_sequence",
    "blowup_exponent_fit",
    "rotation_invariance_residual",
    "singularity_scan",
]

PERIOD = 4.0 * math.pi  # common period in log|omega1| of every mode's phase
DEAD_BAND = 0.05
SCAN_MODE_CAP = 120  # Omega_zeta reaches close to the boundary in arg(omega1)


class TestKind(enum.Enum):
    __test__ = False  # not a pytest class

    GaussianMode = "gaussian-mode"
    PlainGaussian = "plain-gaussian"


@dataclass(frozen=True)
class TestFunctionSpec:
    """``amplitude * e^{-delta (z1 - center)^2} * z2^j`` on ``DBetaPrime``.

    ``PlainGaussian`` drops the ``z2`` factor (it is the ``j = 0`` member).
    """

    __test__ = False  # not a pytest class

    kind: TestKind = TestKind.GaussianMode
    j: int = 0
    delta: float = 0.1
    center: complex = 0j
    amplitude: complex = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        object.__setattr__(self, "kind", TestKind(self.kind))
        if self.kind is TestKind.PlainGaussian:
            object.__setattr__(self, "j", 0)

    def strip_value(self, w1):
        return self.amplitude * np.exp(-self.delta * (np.asarray(w1) - self.center) ** 2)

    def __call__(self, p1, p2):
        return self.strip_value(p1) * np.asarray(p2) ** self.j

    def truncation(self, params: DomainParams, depth: float = 40.0) -> float:
        """``X`` with ``|f| < e^{-depth}`` (relative) for ``|Re z1| > X`` on the strip."""
        c = complex(self.center)
        return abs(c.real) + math.sqrt(depth / self.delta + (params.beta + abs(c.imag)) ** 2)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    window: tuple[float, float]
    points: int
    intercept: float = 0.0

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be nonnegative")
        if self.points < 5:
            raise ValueError("an exponent fit needs at least 5 points")


class Trend(enum.Enum):
    ConvergentTrend = "convergent"
    DivergentTrend = "divergent"


@dataclass(frozen=True)
class LpVerdict:
    p: float
    partial_integrals: tuple[float, ...]
    verdict: Trend
    radii: tuple[float, ...] = ()
    increment_exponent: float = float("nan")
    regime: str = "inner"

    def __post_init__(self):
        pi = np.asarray(self.partial_integrals)
        if np.any(pi < 0) or np.any(np.diff(pi) < 0):
            raise ValueError("partial integrals must be nonnegative and nondecreasing")


@dataclass(frozen=True)
class NuBetaRange:
    p_min: float
    p_max: float

    def contains(self, p: float) -> bool:
        return self.p_min <= p <= self.p_max


def _prime(params: DomainParams) -> DomainParams:
    return params.with_variant(Variant.DBetaPrime)


def _truncated_cfg(params, f: TestFunctionSpec, cfg: QuadConfig) -> QuadConfig:
    if cfg.domain_truncation is not None:
        return cfg
    return cfg.replace(domain_truncation=f.truncation(params))


# ---------------------------------------------------------------- reproducing


def reproduce_mode(
    params: DomainParams,
    j: int,
    h: TestFunctionSpec,
    z: complex,
    cfg: QuadConfig | None = None,
    c_norm: float = 1.0,
) -> IntegralResult:
    """``c_norm * int_S H_j(z, w) h(w) m_j(Im w) dA(w)`` on the strip ``S``.

    ``m_j`` is `modes.fiber_measure`, the integral of ``|w2|^{2j}`` over the
    fiber above ``w1``.  The error estimate compares against the same rule at
    half resolution.
    """
    cfg = _truncated_cfg(params, h, cfg or QuadConfig())
    z = complex(z)
    if abs(z.imag) >= params.beta:
        raise DomainError("z is outside the strip")
    w = WeightProfile(params.beta, j)
    vals = []
    for ref in (1.0, 0.5):
        g = domain_quadrature_grid(_prime(params), cfg.replace(theta_nodes=4), refinement=ref)
        H = mode_kernel_tensor(params, j, z, g.x, g.y, cfg)
        hv = h.strip_value(g.x[:, None] + 1j * g.y[None, :])
        wy = g.wy * fiber_measure(w, g.y)
        vals.append(c_norm * np.einsum("ij,ij,i,j->", H, hv, g.wx, wy))
    n = g.x.size * g.y.size
    return IntegralResult(complex(vals[0]), float(abs(vals[0] - vals[1])), 3 * n)


def calibrate_c_norm(
    params: DomainParams | None = None,
    j: int = -1,
    h: TestFunctionSpec | None = None,
    z: complex = 0.3 + 0.2j,
    cfg: QuadConfig | None = None,
) -> NormCalibration:
    """Constant that makes the per-mode reproducing identity exact at one case.

    Defaults to ``beta = 3 pi / 2``, ``j = -1``, ``h = e^{-0.1 w^2}``,
    ``z = 0.3 + 0.2i``.
    """
    params = params or DomainParams(1.5 * math.pi)
    h = h or TestFunctionSpec(TestKind.GaussianMode, j, 0.1)
    r = reproduce_mode(params, j, h, z, cfg)
    c = h.strip_value(z) / r.value
    if abs(c.imag) > 1e-6 * abs(c):
        raise AccuracyError("calibration constant is not real", best_estimate=c)
    return NormCalibration(float(c.real))


def reproducing_residual_mode(
    params: DomainParams,
    j: int,
    h: TestFunctionSpec,
    z: complex,
    cfg: QuadConfig | None = None,
    c_norm: float = C_NORM,
) -> float:
    """``|c_norm int H_j h m_j dA - h(z)| / max(1, |h(z)|)``."""
    hz = complex(h.strip_value(z))
    if h.amplitude == 0:
        return 0.0
    r = reproduce_mode(params, j, h, z, cfg, c_norm)
    return abs(r.value - hz) / max(1.0, abs(hz))


def reproduce_full(params: DomainParams, f: TestFunctionSpec, z: PointC2, cfg: QuadConfig | None = None) -> IntegralResult:
    """``int_{D'} K'(z, w) f(w) dV(w)`` on the four-coordinate grid.

    The kernel is the full mode sum ``C_NORM sum_j H_j(z1, w1) (z2 conj(w2))^j``
    over ``|j| <= J``; the ``theta`` integral of every mode is done by an FFT
    of ``f`` on the angular grid, so nothing forces ``f`` to be a single mode.
    ``J`` is ``mode_cap`` limited by the angular resolution.
    """
    cfg = _truncated_cfg(params, f, cfg or QuadConfig())
    P = _prime(params)
    z1, z2 = complex(z.z1), complex(z.z2)
    from .domains import contains

    if not contains(P, None, PointC2(z1, z2)):
        raise DomainError("z is not in D'_beta")
    vals = []
    count = 0
    for ref in (1.0, 0.5):
        g = domain_quadrature_grid(P, cfg, refinement=ref)
        nt = g.theta.size
        J = min(cfg.mode_cap, nt // 2 - 1 - abs(f.j))
        if J < 1:
            raise ConfigurationError("too few angular nodes for the mode range")
        js = list(range(-J, J + 1))
        H = dict(zip(js, ordered_map(lambda j: mode_kernel_tensor(params, j, z1, g.x, g.y, cfg), js)))
        total = 0j
        row = 0
        for ch in g.chunks():
            fv = np.broadcast_to(np.asarray(f(ch.p1, ch.p2), dtype=complex), ch.shape)
            # sum_theta w_theta e^{-i j theta} f for every j at once
            F = np.fft.fft(fv, axis=-1) * (2.0 * math.pi / nt)
            w_rest = ch.weight[..., 0] / g.wtheta[0]
            nx = ch.shape[0]
            for j in js:
                G = (F[..., j % nt] * w_rest * np.exp(0.5 * j * ch.s[..., 0])).sum(axis=-1)
                total += z2**j * np.sum(H[j][row : row + nx] * G)
            row += nx
            count += fv.size
        vals.append(C_NORM * total)
    return IntegralResult(complex(vals[0]), float(abs(vals[0] - vals[1])), count)


def reproducing_residual_full(params: DomainParams, f: TestFunctionSpec, z: PointC2, cfg: QuadConfig | None = None) -> float:
    """``|int K'(z, w) f(w) dV(w) - f(z)| / max(1, |f(z)|)``."""
    fz = complex(f(z.z1, z.z2))
    if f.amplitude == 0:
        return 0.0
    r = reproduce_full(params, f, z, cfg)
    return abs(r.value - fz) / max(1.0, abs(fz))


# ---------------------------------------------------------------- L^p


def lp_bounded_range(params: DomainParams) -> NuBetaRange:
    """``(2 / (1 + nu), 2 / (1 - nu))``; needs ``beta > pi``."""
    if not params.beta > math.pi:
        raise DomainError("nu_beta >= 1: the bounded range is only defined for beta > pi")
    nu = params.nu
    return NuBetaRange(2.0 / (1.0 + nu), 2.0 / (1.0 - nu))


def _merge(intervals):
    out = []
    for a, b in sorted(i for i in intervals if i[1] > i[0]):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _shell_phi(P, Q, lo=0.25, hi=0.5):
    """``phi`` intervals in ``[0, pi]`` with ``lo <= |P - Q e^{i phi}| <= hi``."""
    denom = 2.0 * P * Q
    c_lo = (P * P + Q * Q - hi * hi) / denom
    c_hi = (P * P + Q * Q - lo * lo) / denom
    c_lo, c_hi = max(c_lo, -1.0), min(c_hi, 1.0)
    if c_lo >= c_hi:
        return []
    return [(math.acos(c_hi), math.acos(c_lo))]


@dataclass
class _ShellRule:
    """Nodes of ``Omega_zeta`` in ``(a, L, phi)``; ``r`` is handled separately."""

    a: np.ndarray
    L: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    w: list = field(default_factory=list)


def _shell_rule(params, a_z, L_z, n_a=48, n_L=8, n_phi=12) -> _ShellRule:
    mu = params.mu
    # a = arg omega1 on the D' branch; for every a the admissible L and the
    # phi-arcs of both families
    edges = np.linspace(-params.beta, params.beta, n_a // 8 + 1)
    a_nodes, a_w = composite_rule(edges, 8)
    tL, wL = gauss_legendre(n_L)
    tp, wp = gauss_legendre(n_phi)
    rule = _ShellRule(a=a_nodes)
    wa_out = []
    for a, wa in zip(a_nodes, a_w):
        Lmin, Lmax = max(a - math.pi / 2, -mu), min(a + math.pi / 2, mu)
        Ps = [math.exp(s * math.pi / 2 + 0.5 * (a_z + a)) for s in (+1, -1)]
        # breakpoints in L where a family's arc appears or changes shape
        br = {Lmin, Lmax}
        for P in Ps:
            for qb in (0.25 - P, P - 0.5, P - 0.25, P + 0.25, P + 0.5):
                if qb > 0:
                    Lb = 2.0 * math.log(qb) - L_z
                    if Lmin < Lb < Lmax:
                        br.add(Lb)
        br = sorted(br)
        Ls, Phis, Ws = [], [], []
        for l0, l1 in zip(br[:-1], br[1:]):
            half = 0.5 * (l1 - l0)
            for t, wt in zip(tL, wL):
                L = l0 + half * (t + 1.0)
                Q = math.exp(0.5 * (L_z + L))
                arcs = _merge(sum((_shell_phi(P, Q) for P in Ps), []))
                for p0, p1 in arcs:
                    hp = 0.5 * (p1 - p0)
                    ph = p0 + hp * (tp + 1.0)
                    # arcs are symmetric: +phi and -phi
                    for sgn in (1.0, -1.0):
                        Ls.append(np.full(n_phi, L))
                        Phis.append(sgn * ph)
                        Ws.append(wa * half * wt * hp * wp * math.exp(L) / 2.0)
        if Ls:
            rule.L.append(np.concatenate(Ls))
            rule.phi.append(np.concatenate(Phis))
            rule.w.append(np.concatenate(Ws))
            wa_out.append(True)
        else:
            rule.L.append(np.empty(0))
            rule.phi.append(np.empty(0))
            rule.w.append(np.empty(0))
            wa_out.append(False)
    keep = np.array(wa_out)
    rule.a = rule.a[keep]
    rule.L = [v for v, k in zip(rule.L, keep) if k]
    rule.phi = [v for v, k in zip(rule.phi, keep) if k]
    rule.w = [v for v, k in zip(rule.w, keep) if k]
    return rule


def _lp_increments(params, p, zeta: PointC2, radii, cfg, n_u=16):
    """Integrals of ``|K_D(omega, zeta)|^p`` over ``Omega_zeta`` between
    consecutive radii."""
    zp = map_unprime_to_prime(params, zeta)
    a_z, lr_z = float(np.imag(zp.z1)), float(np.real(zp.z1))
    L_z = float(np.log(abs(zeta.z2) ** 2))
    th_z = float(np.angle(zeta.z2))
    margin = min(math.pi / 2 - abs(a_z - L_z), params.mu - abs(L_z))
    if margin < 0.05:
        raise AccuracyError("zeta is too close to the boundary of D_beta")
    rule = _shell_rule(params, a_z, L_z)
    if rule.a.size == 0:
        raise ConfigurationError("Omega_zeta is empty for this zeta")
    logr = np.log(np.asarray(radii, dtype=float))
    u, wu = composite_rule(np.sort(logr), n_u)
    # kernel argument omega1' - conj(zeta1') = (u - lr_z) + i (a + a_z);
    # e^{i j (theta_omega - theta_zeta)} with theta_omega - theta_zeta = -arg P - phi
    # and arg P = -(lr_z - u) / 2, so the u-part of the phase joins the row factor.
    # Per-column bounds of log|q| keep every scaled term below its true size.
    q_hi = 0.5 * (L_z + np.array([v.max() for v in rule.L]))
    q_lo = 0.5 * (L_z + np.array([v.min() for v in rule.L]))
    re = u - lr_z
    im = rule.a + a_z
    rot = 0.5 * (lr_z - u)

    def term(j):
        return mode_terms_separable(params, j, re, im, rot, q_hi if j >= 0 else q_lo, cfg)

    terms = mode_series(params, None, None, cfg, term=term)
    js = np.array(sorted(terms))
    Ht = np.stack([terms[j][0] for j in js], axis=-1)  # (nu, na, nj)
    out = np.zeros(u.size)
    for ia in range(rule.a.size):
        L, phi, w = rule.L[ia], rule.phi[ia], rule.w[ia]
        base = np.where(js >= 0, q_hi[ia], q_lo[ia])
        Qm = np.exp(js[:, None] * (0.5 * (L_z + L)[None, :] - base[:, None]) - 1j * js[:, None] * phi[None, :])
        S = Ht[:, ia, :] @ Qm  # (nu, nodes)
        out += (np.abs(S) ** p) @ w
    r = np.exp(u)
    # |K| = C_NORM |S| / (r |zeta1|); dV = r^2 du da (e^L / 2) dL dphi
    dens = out * (C_NORM / abs(zeta.z1)) ** p * r ** (2.0 - p) * wu
    npan = logr.size - 1
    per = dens.reshape(npan, n_u).sum(axis=1)
    # panels are in increasing u; return them in the order of `radii`
    if logr[0] > logr[-1]:
        per = per[::-1]
    return per


def lp_blowup_scan(
    params: DomainParams,
    p: float,
    zeta: PointC2,
    radii=None,
    cfg: QuadConfig | None = None,
    regime: str = "inner",
    steps: int = 5,
) -> LpVerdict:
    """Trend test for ``int_{Omega_zeta} |K_D(omega, zeta)|^p dV`` near
    ``omega1 = 0`` (``regime="inner"``) or ``omega1 = infinity`` (``"outer"``).

    ``Omega_zeta`` is the set of ``omega`` in ``D_beta`` with
    ``1/4 <= |e^{+-pi/2} (zeta1/conj(omega1))^{-i/2} - zeta2 conj(omega2)| <= 1/2``
    (union of both signs), cut to ``|omega1| < |zeta1|`` (inner) or
    ``|omega1| > |zeta1|`` (outer).  By default the radii are
    ``|zeta1| e^{-+4 pi k}``; the kernel's phase is ``4 pi``-periodic in
    ``log|omega1|``, so every increment then covers whole periods.

    The verdict regresses ``log`` increments on the log-distance to the
    singular end: a slope above ``+0.05`` means geometric decay of the
    increments (ConvergentTrend); anything else, including the dead band
    ``|slope| <= 0.05``, is DivergentTrend.  The first increment is left out
    of the fit as a transient when more than three are available.
    """
    cfg = cfg or QuadConfig(mode_cap=SCAN_MODE_CAP)
    if regime not in ("inner", "outer"):
        raise ConfigurationError("regime must be 'inner' or 'outer'")
    if not p >= 1:
        raise ConfigurationError("p must be >= 1")
    r1 = abs(complex(zeta.z1))
    if radii is None:
        sgn = -1.0 if regime == "inner" else 1.0
        radii = r1 * np.exp(sgn * PERIOD * np.arange(steps + 1))
    radii = np.asarray(radii, dtype=float)
    d = np.diff(radii)
    if radii.size < 4 or not (np.all(d < 0) if regime == "inner" else np.all(d > 0)):
        raise ConfigurationError("radii must be monotone toward the singular end, >= 4 values")
    if (regime == "inner" and radii[0] > r1 * (1 + 1e-12)) or (regime == "outer" and radii[0] < r1 * (1 - 1e-12)):
        raise ConfigurationError("radii must start on the correct side of |zeta1|")
    inc = _lp_increments(params, p, zeta, radii, cfg)
    partial = np.concatenate([[0.0], np.cumsum(inc)])
    mid = 0.5 * (np.log(radii[:-1]) + np.log(radii[1:]))
    x = -mid if regime == "outer" else mid
    sl = slice(1, None) if inc.size > 3 else slice(None)
    with np.errstate(divide="ignore"):
        y = np.log(inc[sl])
    if not np.all(np.isfinite(y)):
        raise AccuracyError("vanishing increment in the L^p scan")
    slope = float(stats.linregress(x[sl], y).slope)
    verdict = Trend.ConvergentTrend if slope > DEAD_BAND else Trend.DivergentTrend
    return LpVerdict(float(p), tuple(float(v) for v in partial), verdict, tuple(map(float, radii)), slope, regime)


# ---------------------------------------------------------------- exponent fits


def fit_exponent(x, y, window=None) -> ExponentFit:
    """Least-squares line through ``(x, log|y|)``; slope with its standard error."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.abs(np.asarray(y)))
    if x.size < 5:
        raise ConfigurationError("need at least 5 points")
    r = stats.linregress(x, ly)
    win = window if window is not None else (float(x.min()), float(x.max()))
    return ExponentFit(float(r.slope), float(r.stderr), win, int(x.size), float(r.intercept))


def _check_fit(fit: ExponentFit):
    if fit.stderr > 0.1 * abs(fit.slope):
        raise AccuracyError(f"exponent fit too noisy: slope {fit.slope:.4g} +- {fit.stderr:.2g}")
    return fit


def decay_exponent_fit(
    params: DomainParams,
    j: int = -1,
    x_window=(10.0, 30.0),
    cfg: QuadConfig | None = None,
    points: int = 11,
) -> ExponentFit:
    """Slope of ``log|H_j(x, 0)|`` against ``x`` over ``x_window``."""
    if points < 8:
        raise ConfigurationError("decay fits use at least 8 points")
    xs = np.linspace(x_window[0], x_window[1], points)
    vals = ordered_map(lambda x: h_j(params, j, complex(x), 0j, cfg).value, xs)
    return _check_fit(fit_exponent(xs, vals, (float(x_window[0]), float(x_window[1]))))


def stroboscopic_sequence(l0: float = -8.0 - 4.0 * math.pi, n: int = 5, period: float = PERIOD) -> np.ndarray:
    """``t_k = exp(l0 - period k)``, ``k = 0..n-1``.

    ``|K_D(zeta, (t, omega2))|`` carries a log-periodic ripple of period
    ``4 pi`` in ``log t``; sampling once per period removes it from fits.
    """
    return np.exp(l0 - period * np.arange(n))


def _omega_path(params, t, omega2, phi):
    L = math.log(abs(omega2) ** 2)
    if abs(L) >= params.mu:
        raise DomainError("|log|omega2|^2| must be below beta - pi/2")
    return PointC2(np.asarray(t) * np.exp(1j * phi), np.full(np.shape(t), complex(omega2)))


def blowup_exponent_fit(
    params: DomainParams,
    zeta: PointC2,
    t_sequence=None,
    cfg: QuadConfig | None = None,
    omega2: complex = 1.0,
    phi: float = 0.0,
) -> ExponentFit:
    """Slope of ``log|K_D(zeta, (t e^{i phi}, omega2))|`` against ``log t``."""
    t = stroboscopic_sequence() if t_sequence is None else np.asarray(t_sequence, dtype=float)
    if np.any(t <= 0):
        raise ConfigurationError("t values must be positive")
    omega = _omega_path(params, t, omega2, phi)
    zs = PointC2(np.full(t.shape, complex(zeta.z1)), np.full(t.shape, complex(zeta.z2)))
    v, _, _ = kernel_unprime_array(params, zs, omega, cfg)
    lt = np.log(t)
    return _check_fit(fit_exponent(lt, v, (float(t.min()), float(t.max()))))


# ---------------------------------------------------------------- invariance, scans


def rotation_invariance_residual(params: DomainParams, z: PointC2, w: PointC2, theta: float, cfg: QuadConfig | None = None, with_error: bool = False):
    """``|K'(R z, R w) - K'(z, w)|`` with ``R(z1, z2) = (z1, e^{i theta} z2)``."""
    a = kernel_prime(params, z, w, cfg)
    if theta == 0:
        return (0.0, 2 * a.err_estimate) if with_error else 0.0
    b = kernel_prime(params, z.rotate(theta), w.rotate(theta), cfg)
    res = abs(b.value - a.value)
    return (res, a.err_estimate + b.err_estimate) if with_error else res


def singularity_scan(params: DomainParams, zeta: PointC2, omega2: complex, t_grid, cfg: QuadConfig | None = None):
    """``(t, |K_D(zeta, (t, omega2))|, err)`` rows along ``omega1 = t``."""
    t = np.asarray(t_grid, dtype=float)
    omega = _omega_path(params, t, omega2, 0.0)
    zs = PointC2(np.full(t.shape, complex(zeta.z1)), np.full(t.shape, complex(zeta.z2)))
    v, e, _ = kernel_unprime_array(params, zs, omega, cfg)
    return [(float(a), float(abs(b)), float(c)) for a, b, c in zip(t, v, e)]
