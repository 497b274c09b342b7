import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wormkit.domains import DomainParams, Variant
from wormkit.errors import AccuracyError, ConfigurationError
from wormkit.quad import (
    IntegralResult,
    QuadConfig,
    composite_rule,
    gauss_legendre,
    integrate_domain,
    integrate_line,
    monte_carlo_domain,
)


def gauss(x):
    return np.exp(-x * x)


def sech_sq(x):
    # x^2 / sinh^2(pi x), filled with 1/pi^2 at 0
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, 1.0 / math.pi**2)
    nz = x != 0
    out[nz] = (x[nz] / np.sinh(math.pi * x[nz])) ** 2
    return out


def test_gauss_legendre_exactness():
    t, w = gauss_legendre(8)
    assert w.sum() == pytest.approx(2.0)
    assert np.dot(w, t**14) == pytest.approx(2.0 / 15.0, rel=1e-14)
    x, wx = composite_rule([0.0, 1.0, 3.0], 8)
    assert np.dot(wx, x**3) == pytest.approx(81.0 / 4.0, rel=1e-14)


def test_line_examples():
    r = integrate_line(gauss, 1.0)
    assert r.value.real == pytest.approx(math.sqrt(math.pi), abs=1e-12)
    assert r.err_estimate < 1e-12
    r = integrate_line(lambda x: np.exp(1j * x - np.abs(x)), 1.0)
    assert r.value == pytest.approx(1.0, abs=1e-10)


def test_line_removable_point_self_consistent():
    coarse = integrate_line(sech_sq, 2 * math.pi)
    fine = integrate_line(sech_sq, 2 * math.pi, QuadConfig(rel_tol=1e-12, abs_tol=1e-15))
    assert coarse.value.real > 0
    assert abs(coarse.value - fine.value) < 1e-10
    # closed form: int x^2 / sinh^2(pi x) dx = 1 / (3 pi)
    assert fine.value.real == pytest.approx(1.0 / (3.0 * math.pi), rel=1e-12)


def test_line_errors():
    with pytest.raises(ConfigurationError):
        integrate_line(gauss, 0.0)
    with pytest.raises(AccuracyError) as exc:
        integrate_line(lambda x: np.cos(200 * x) * np.exp(-np.abs(x) / 50), 0.02, QuadConfig(max_evaluations=200, panel_order=4))
    assert exc.value.best_estimate is not None


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), k=st.floats(0, 4))
def test_line_is_linear(a, b, k):
    f = lambda x: np.exp(-x * x) * np.cos(k * x)
    g = lambda x: 1.0 / np.cosh(x)
    rf, rg = integrate_line(f, 1.0), integrate_line(g, 1.0)
    rh = integrate_line(lambda x: a * f(x) + b * g(x), 1.0)
    err = abs(a) * rf.err_estimate + abs(b) * rg.err_estimate + rh.err_estimate
    assert abs(rh.value - (a * rf.value + b * rg.value)) <= err + 1e-14


def test_line_tighter_tolerance_never_worse():
    f = lambda x: np.exp(1j * 3 * x) / np.cosh(x) ** 2
    ref = integrate_line(f, 2.0, QuadConfig(rel_tol=1e-13, abs_tol=1e-16)).value
    prev = math.inf
    for tol in (1e-4, 5e-5, 2.5e-5, 1.25e-5):
        d = abs(integrate_line(f, 2.0, QuadConfig(rel_tol=tol, abs_tol=1e-16, panel_order=8)).value - ref)
        assert d <= prev + 1e-15
        prev = d


def test_line_deterministic():
    f = lambda x: np.exp(-np.abs(x)) * np.sin(x) ** 2
    a = integrate_line(f, 1.0)
    b = integrate_line(f, 1.0)
    assert a == b


def test_config_validation_and_replace():
    with pytest.raises(ConfigurationError):
        QuadConfig(rel_tol=0)
    with pytest.raises(ConfigurationError):
        QuadConfig(mode_cap=0)
    cfg = QuadConfig().replace(mode_cap=7)
    assert cfg.mode_cap == 7
    with pytest.raises(ValueError):
        IntegralResult(0j, -1.0, 1)


def test_slab_volume_matches_monte_carlo():
    P = DomainParams(1.5 * math.pi)
    cfg = QuadConfig(domain_truncation=1.0, theta_nodes=8)
    r = integrate_domain(lambda a, b: 1.0, P, cfg)
    mc, se = monte_carlo_domain(lambda a, b: 1.0, P, 1.0, 1_000_000, seed=11)
    assert abs(mc.real - r.value.real) < 3 * se


def test_slab_volume_dbeta_monte_carlo():
    P = DomainParams(1.5 * math.pi, Variant.DBeta)
    cfg = QuadConfig(domain_truncation=0.5, theta_nodes=8)
    r = integrate_domain(lambda a, b: 1.0, P, cfg)
    mc, se = monte_carlo_domain(lambda a, b: 1.0, P, 0.5, 400_000, seed=5)
    assert abs(mc.real - r.value.real) < 4 * se


def test_odd_integrand_vanishes():
    P = DomainParams(1.5 * math.pi)
    cfg = QuadConfig(domain_truncation=10.0, theta_nodes=8)
    r = integrate_domain(lambda a, b: np.exp(-0.1 * a * a) * b, P, cfg)
    assert abs(r.value) < 1e-10


def test_gaussian_norm_stable_under_refinement():
    P = DomainParams(1.5 * math.pi)
    cfg = QuadConfig(domain_truncation=20.0, theta_nodes=8)
    r = integrate_domain(lambda a, b: np.abs(np.exp(-0.1 * a * a)) ** 2, P, cfg)
    assert np.isfinite(r.value.real) and r.value.real > 0
    assert r.err_estimate < 1e-4 * abs(r.value)
