"""Bergman kernels of ``DBetaPrime`` and ``DBeta``.

The mode-``j`` strip kernel is

    H_j(z1, w1) = (1 / 2 pi) int e^{i (z1 - conj(w1)) xi} g_j(xi) d xi,
    g_j = 1 / lambda_hat_j,

and the full kernel of ``DBetaPrime`` is

    K'(z, w) = C_NORM * sum_j H_j(z1, w1) (z2 conj(w2))^j.

``C_NORM = 1/pi`` accounts for the fiber measure being ``pi lambda_j``
rather than ``lambda_j``; the demo ``demos/02_calibrate_c_norm.py`` measures
it from the per-mode reproducing identity.

``g_j`` is analytic in ``|Im xi| < min(1, nu)``.  For large ``|Re zeta|`` the
integral is a tiny difference of O(1) quantities, so the contour is moved to
``Im xi = sigma`` with ``sigma = sign(Re zeta) min(1, nu) / 2``; this scales
the integrand by ``e^{-|sigma Re zeta|}`` and keeps the relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainParams, PointC2, Variant, contains, map_unprime_to_prime
from .errors import AccuracyError, DomainError, SingularityError
from .modes import WeightProfile, log_lambda_hat
from .parallel import ordered_map
from .quad import QuadConfig, composite_rule, integrate_line

__all__ = [
    "C_NORM",
    "NormCalibration",
    "KernelValue",
    "log_g",
    "h_j",
    "mode_terms",
    "mode_kernel_tensor",
    "mode_terms_separable",
    "mode_series",
    "sum_series",
    "kernel_prime",
    "kernel_prime_array",
    "kernel_unprime",
    "kernel_unprime_array",
    "asymptotic_ref_prime",
    "asymptotic_ref_unprime",
]

C_NORM = 1.0 / math.pi
MIN_DECAY = 1e-2
SHIFT_FRACTION = 0.5
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NormCalibration:
    c_norm: float = C_NORM

    def __post_init__(self):
        if not self.c_norm > 0:
            raise ValueError("c_norm must be positive")


@dataclass(frozen=True)
class KernelValue:
    value: complex
    err_estimate: float
    modes_used: tuple[int, int]

    def __post_init__(self):
        if not self.err_estimate >= 0:
            raise ValueError("err_estimate must be nonnegative")


def log_g(params: DomainParams, j: int, xi):
    """``log g_j(xi) = -log lambda_hat_j(xi)`` (complex ``xi`` allowed)."""
    return -log_lambda_hat(WeightProfile(params.beta, j), xi)


def _check_strip(params: DomainParams, *w1):
    for v in w1:
        if np.any(np.abs(np.imag(v)) >= params.beta):
            raise DomainError("point outside the strip |Im z1| < beta")


def _decay_rate(params: DomainParams, im_zeta) -> float:
    rate = 2.0 * params.beta - float(np.max(np.abs(im_zeta)))
    if rate < MIN_DECAY:
        raise AccuracyError(f"decay margin {rate:.3g} too small near the strip edge")
    return rate


def _shift(params: DomainParams, re_zeta):
    return SHIFT_FRACTION * min(1.0, params.nu) * np.sign(re_zeta)


def h_j(params: DomainParams, j: int, z1: complex, w1: complex, cfg: QuadConfig | None = None) -> KernelValue:
    """``H_j(z1, w1)`` by adaptive quadrature on the (shifted) real line."""
    cfg = cfg or QuadConfig()
    _check_strip(params, z1, w1)
    zeta = complex(z1) - np.conj(complex(w1))
    rate = _decay_rate(params, zeta.imag)
    sigma = float(_shift(params, zeta.real))

    def f(xi):
        t = xi + 1j * sigma
        return np.exp(log_g(params, j, t) + 1j * zeta * t) / (2.0 * math.pi)

    r = integrate_line(f, rate, cfg)
    return KernelValue(r.value, r.err_estimate, (j, j))


def _xi_window(params: DomainParams, j: int, y_lo: float, y_hi: float, depth: float = 40.0):
    """Interval carrying everything within ``e^{-depth}`` of the integrand peak
    for every ``Im zeta`` in ``[y_lo, y_hi]``."""
    c = 0.5 * (j + 1)
    rate = 2.0 * params.beta - max(abs(y_lo), abs(y_hi))
    R = (depth + 20.0) / rate + 2.0
    grid = np.arange(min(0.0, c) - R, max(0.0, c) + R, 0.05)
    base = log_g(params, j, grid)
    lo, hi = np.inf, -np.inf
    for y in (y_lo, y_hi):
        prof = base - y * grid
        keep = grid[prof > prof.max() - depth]
        lo, hi = min(lo, keep[0]), max(hi, keep[-1])
    return lo - 1.0, hi + 1.0


def _xi_rule(params, j, y_lo, y_hi, re_max, shifted, cfg, order):
    lo, hi = _xi_window(params, j, y_lo, y_hi)
    pole = min(1.0, params.nu) * ((1.0 - SHIFT_FRACTION) if shifted else 1.0)
    h = min(cfg.kernel_panel, 0.75 * pole, 8.0 / max(re_max, 1e-300))
    n = max(1, int(math.ceil((hi - lo) / h)))
    return composite_rule(np.linspace(lo, hi, n + 1), order)


def _mode_sum_fixed(params, j, zeta, logq, xi, wt, sigma):
    t = xi + 1j * sigma
    lg = log_g(params, j, t)
    expo = lg[None, :] + 1j * zeta[:, None] * t[None, :] + j * logq[:, None]
    f = np.exp(expo)
    fw = f * wt
    return fw.sum(axis=1) / (2.0 * math.pi), np.abs(fw).sum(axis=1) / (2.0 * math.pi)


def mode_terms(params: DomainParams, j: int, zeta, logq=0.0, cfg: QuadConfig | None = None, chunk: int = 2048):
    """Batched ``H_j(zeta) q^j`` with ``zeta = z1 - conj(w1)``, ``log q`` given.

    A fixed composite Gauss-Legendre rule is applied on the shifted contour;
    the error estimate is the gap to a rule of lower order on the same panels
    plus a rounding allowance.

    Returns
    -------
    values, errors : ndarray
    """
    cfg = cfg or QuadConfig()
    zeta = np.asarray(zeta, dtype=complex)
    shape = zeta.shape
    zeta = zeta.ravel()
    logq = np.broadcast_to(np.asarray(logq, dtype=complex), shape).ravel()
    _decay_rate(params, zeta.imag)
    vals = np.empty(zeta.size, dtype=complex)
    errs = np.empty(zeta.size)
    y_lo, y_hi = float(zeta.imag.min()), float(zeta.imag.max())
    re_max = float(np.abs(zeta.real).max())
    n_hi = cfg.kernel_order
    n_lo = max(4, n_hi - 8)
    rules = {}
    for n in (n_hi, n_lo):
        rules[n] = _xi_rule(params, j, y_lo, y_hi, re_max, re_max > 0, cfg, n)
    sig = _shift(params, zeta.real)
    for s in np.unique(sig):
        idx = np.nonzero(sig == s)[0]
        for k in range(0, idx.size, chunk):
            sl = idx[k : k + chunk]
            v_hi, mag = _mode_sum_fixed(params, j, zeta[sl], logq[sl], *rules[n_hi], s)
            v_lo, _ = _mode_sum_fixed(params, j, zeta[sl], logq[sl], *rules[n_lo], s)
            vals[sl] = v_hi
            errs[sl] = np.abs(v_hi - v_lo) + 10.0 * _EPS * mag
    return vals.reshape(shape), errs.reshape(shape)


def mode_terms_separable(params: DomainParams, j: int, re, im, phase_re=0.0, logq_im=0.0, cfg: QuadConfig | None = None):
    """``H_j(zeta) e^{j (i phase_re + logq_im)}`` on ``zeta = re[:, None] + i im[None, :]``.

    ``phase_re`` (real, per row) and ``logq_im`` (complex, per column) split
    ``log q`` so that ``e^{i zeta xi + j log q}`` factors into a row part and a
    column part; each mode is then one matrix product on the shifted
    contour.  Rows must share the sign of ``re``.

    Returns
    -------
    values, errors : ndarray of shape ``(re.size, im.size)``
    """
    cfg = cfg or QuadConfig()
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    if np.any(re > 0) and np.any(re < 0):
        raise ValueError("rows must share the sign of Re zeta")
    _decay_rate(params, im)
    phase_re = np.broadcast_to(np.asarray(phase_re, dtype=float), re.shape)
    logq_im = np.broadcast_to(np.asarray(logq_im, dtype=complex), im.shape)
    re_max = float(np.abs(re).max())
    sigma = float(_shift(params, re[np.argmax(np.abs(re))]))
    out = []
    for n in (cfg.kernel_order, max(4, cfg.kernel_order - 8)):
        xi, wt = _xi_rule(params, j, float(im.min()), float(im.max()), re_max, sigma != 0, cfg, n)
        t = xi + 1j * sigma
        half = 0.5 * log_g(params, j, t)
        A = np.exp(1j * np.outer(re, t) + 1j * j * phase_re[:, None] + half[None, :]) * wt
        B = np.exp(-np.outer(im, t) + j * logq_im[:, None] + half[None, :])
        out.append((A @ B.T / (2.0 * math.pi), np.abs(A) @ np.abs(B).T / (2.0 * math.pi)))
    (v_hi, mag), (v_lo, _) = out
    return v_hi, np.abs(v_hi - v_lo) + 10.0 * _EPS * mag


def mode_kernel_tensor(params: DomainParams, j: int, z1: complex, x, y, cfg: QuadConfig | None = None):
    """``H_j(z1, x + iy)`` on the tensor grid ``x[:, None], y[None, :]``.

    Uses ``e^{i zeta xi} = e^{i z1 xi} e^{-i x xi} e^{-y xi}`` so the whole grid
    is one matrix product.  No contour shift, so accuracy is absolute
    relative to ``max |H_j|``.
    """
    cfg = cfg or QuadConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z1 = complex(z1)
    _check_strip(params, z1)
    y_lo, y_hi = z1.imag + y.min(), z1.imag + y.max()
    _decay_rate(params, [y_lo, y_hi])
    re_max = abs(z1.real) + float(np.abs(x).max())
    xi, wt = _xi_rule(params, j, y_lo, y_hi, re_max, False, cfg, cfg.kernel_order)
    a = np.exp(log_g(params, j, xi) + 1j * z1 * xi) * wt / (2.0 * math.pi)
    A = np.exp(-1j * np.outer(x, xi)) * a
    B = np.exp(-np.outer(y, xi))
    return A @ B.T


def _as_points(params, p: PointC2, name):
    z1 = np.asarray(p.z1, dtype=complex)
    z2 = np.asarray(p.z2, dtype=complex)
    if np.any(z2 == 0):
        raise SingularityError(f"{name}: z2 = 0")
    inside = np.asarray(contains(params.with_variant(Variant.DBetaPrime), None, PointC2(z1, z2)))
    if not np.all(inside):
        raise DomainError(f"{name} is not in D'_beta")
    return z1, z2


def mode_series(params: DomainParams, zeta, logq, cfg: QuadConfig | None = None, block: int = 8, term=None):
    """Terms ``H_j(zeta) e^{j logq}`` of a mode sum, grown until it has converged.

    ``logq`` is an array broadcastable to ``zeta`` or a callable ``j -> logq``.
    Alternatively ``term(j) -> (values, errors)`` supplies the terms directly
    (``zeta`` and ``logq`` are then ignored).
    Modes are added in blocks of ``block`` per side, starting from
    ``[-block, block]``.  A side stops once three consecutive terms fall below
    ``min(abs_tol, rel_tol * max|term|)`` at every point.  Blocks are fixed, so
    the set of modes used does not depend on the thread count.

    Returns
    -------
    dict
        ``j -> (values, errors)``, covering a contiguous range of ``j``.

    Raises
    ------
    AccuracyError
        The sum needs modes beyond ``cfg.mode_cap``.
    """
    cfg = cfg or QuadConfig()
    if term is None:
        zeta = np.asarray(zeta, dtype=complex)

        def term(j):
            lq = logq(j) if callable(logq) else logq
            return mode_terms(params, j, zeta, lq, cfg)

    first = list(range(-block, block + 1))
    terms = dict(zip(first, ordered_map(term, first)))
    done = {+1: False, -1: False}

    def small_tail(side):
        lo, hi = min(terms), max(terms)
        js = [hi, hi - 1, hi - 2] if side > 0 else [lo, lo + 1, lo + 2]
        peak = np.max([np.abs(v) for v, _ in terms.values()], axis=0)
        thr = np.minimum(cfg.abs_tol, cfg.rel_tol * peak)
        return all(np.all(np.abs(terms[k][0]) <= thr) for k in js)

    while True:
        for side in (+1, -1):
            if not done[side]:
                done[side] = small_tail(side)
        if done[+1] and done[-1]:
            return terms
        lo, hi = min(terms), max(terms)
        new = []
        if not done[+1]:
            new += list(range(hi + 1, hi + block + 1))
        if not done[-1]:
            new += list(range(lo - block, lo))
        if max(abs(k) for k in new) > cfg.mode_cap:
            partial = sum(terms[k][0] for k in sorted(terms))
            raise AccuracyError(
                f"mode sum not converged at |j| = {cfg.mode_cap}",
                best_estimate=partial,
                err_estimate=float(np.max(np.abs(terms[hi][0]) + np.abs(terms[lo][0]))),
            )
        terms.update(zip(new, ordered_map(term, new)))


def sum_series(terms):
    """Fixed-order sum of `mode_series` output with its error estimate.

    The error adds the per-term quadrature errors and a geometric tail past
    each end, with the ratio read off the last two terms.
    """
    lo, hi = min(terms), max(terms)
    total = np.zeros(np.shape(terms[lo][0]), dtype=complex)
    err = np.zeros(total.shape)
    for k in range(lo, hi + 1):
        total += terms[k][0]
        err += terms[k][1]
    for a, b in ((hi, hi - 1), (lo, lo + 1)):
        ta, tb = np.abs(terms[a][0]), np.abs(terms[b][0])
        r = np.minimum(np.divide(ta, tb, out=np.zeros_like(ta), where=tb > 0), 0.9)
        err += ta * r / (1.0 - r)
    err += 4.0 * _EPS * np.abs(total)
    return total, err, (lo, hi)


def kernel_prime_array(params: DomainParams, z: PointC2, w: PointC2, cfg: QuadConfig | None = None):
    """Vectorized `kernel_prime` over broadcast arrays of points.

    Returns
    -------
    values, errors : ndarray
    modes : (int, int)
    """
    cfg = cfg or QuadConfig()
    z1, z2 = _as_points(params, z, "z")
    w1, w2 = _as_points(params, w, "w")
    z1, z2, w1, w2 = np.broadcast_arrays(z1, z2, w1, w2)
    zeta = z1 - np.conj(w1)
    logq = np.log(z2 * np.conj(w2))
    try:
        terms = mode_series(params, zeta, logq, cfg)
    except AccuracyError as exc:
        raise AccuracyError(
            str(exc),
            best_estimate=None if exc.best_estimate is None else C_NORM * exc.best_estimate,
            err_estimate=exc.err_estimate,
        ) from None
    total, err, modes = sum_series(terms)
    return C_NORM * total, C_NORM * err, modes


def kernel_prime(params: DomainParams, z: PointC2, w: PointC2, cfg: QuadConfig | None = None) -> KernelValue:
    """Bergman kernel of ``DBetaPrime`` at one pair of points."""
    v, e, modes = kernel_prime_array(params, z, w, cfg)
    return KernelValue(complex(v), float(e), modes)


def _unprime_points(params, p: PointC2, name):
    z1 = np.asarray(p.z1, dtype=complex)
    if np.any(z1 == 0):
        raise SingularityError(f"{name}: first coordinate is 0")
    return map_unprime_to_prime(params, p), z1


def kernel_unprime_array(params: DomainParams, zeta: PointC2, omega: PointC2, cfg: QuadConfig | None = None):
    """Vectorized `kernel_unprime`."""
    zp, z1 = _unprime_points(params, zeta, "zeta")
    wp, w1 = _unprime_points(params, omega, "omega")
    v, e, modes = kernel_prime_array(params, zp, wp, cfg)
    jac = z1 * np.conj(w1)
    return v / jac, e / np.abs(jac), modes


def kernel_unprime(params: DomainParams, zeta: PointC2, omega: PointC2, cfg: QuadConfig | None = None) -> KernelValue:
    """Bergman kernel of ``DBeta`` by pulling back through ``(log z1, z2)``.

    ``K_D(zeta, omega) = K'(log zeta, log omega) / (zeta1 conj(omega1))`` with
    the logarithm branch fixed by ``Im log z1 - log|z2|^2 in (-pi/2, pi/2)``.
    """
    v, e, modes = kernel_unprime_array(params, zeta, omega, cfg)
    return KernelValue(complex(v), float(e), modes)


def asymptotic_ref_prime(params: DomainParams, z: PointC2, w: PointC2):
    """Leading model ``e^{-nu |z1 - conj(w1)|} / (z2 conj(w2))`` of the ``j = -1``
    part, up to an overall constant."""
    q = np.asarray(z.z2) * np.conj(np.asarray(w.z2))
    if np.any(q == 0):
        raise SingularityError("z2 conj(w2) = 0")
    v = np.exp(-params.nu * np.abs(np.asarray(z.z1) - np.conj(np.asarray(w.z1)))) / q
    return complex(v) if np.ndim(v) == 0 else v


def asymptotic_ref_unprime(params: DomainParams, zeta: PointC2, omega: PointC2):
    """Magnitude model ``|omega1|^{nu-1} / |zeta1|^{nu+1} / |zeta2 omega2|``.

    Only its power of ``|omega1|`` is meaningful; it is meant for exponent
    fits as ``omega1 -> 0``.
    """
    a1, a2 = np.abs(np.asarray(zeta.z1)), np.abs(np.asarray(zeta.z2))
    b1, b2 = np.abs(np.asarray(omega.z1)), np.abs(np.asarray(omega.z2))
    if np.any(a1 == 0) or np.any(a2 == 0) or np.any(b1 == 0) or np.any(b2 == 0):
        raise SingularityError("zero coordinate in the blowup model")
    if np.any(b1 >= a1):
        raise DomainError("model requires |omega1| < |zeta1|")
    nu = params.nu
    v = b1 ** (nu - 1.0) / a1 ** (nu + 1.0) / (a2 * b2)
    return float(v) if np.ndim(v) == 0 else v
