import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wormkit.analysis import (
    ExponentFit,
    LpVerdict,
    NuBetaRange,
    TestFunctionSpec,
    TestKind,
    Trend,
    blowup_exponent_fit,
    calibrate_c_norm,
    decay_exponent_fit,
    fit_exponent,
    lp_blowup_scan,
    lp_bounded_range,
    reproduce_mode,
    reproducing_residual_full,
    reproducing_residual_mode,
    rotation_invariance_residual,
    singularity_scan,
    stroboscopic_sequence,
)
from wormkit.domains import DomainParams, PointC2, Variant
from wormkit.errors import AccuracyError, ConfigurationError, DomainError
from wormkit.kernel import C_NORM
from wormkit.quad import QuadConfig

BETA = 1.5 * math.pi
P = DomainParams(BETA)
D = DomainParams(BETA, Variant.DBeta)
ZETA = PointC2(np.exp(-2j), np.exp(-1.25))


def test_calibration_matches_fiber_constant():
    c = calibrate_c_norm()
    assert c.c_norm == pytest.approx(C_NORM, rel=1e-6)


def test_calibration_independent_triples_agree():
    a = calibrate_c_norm(P, 0, TestFunctionSpec(j=0, delta=0.2, center=0.5), -0.4 + 1.0j)
    b = calibrate_c_norm(DomainParams(1.25 * math.pi), 2, TestFunctionSpec(j=2, delta=0.15), 0.7 - 0.3j)
    assert a.c_norm == pytest.approx(b.c_norm, rel=1e-4)


def test_mode_residual_examples():
    h = TestFunctionSpec(TestKind.GaussianMode, -1, 0.1)
    assert reproducing_residual_mode(P, -1, h, 0.3 + 0.2j) < 1e-4
    for j in (0, 1):
        assert reproducing_residual_mode(P, j, TestFunctionSpec(j=j), 0.3 + 0.2j) < 1e-3
    zero = TestFunctionSpec(amplitude=0.0)
    assert reproducing_residual_mode(P, 0, zero, 0.3 + 0.2j) == 0.0


def test_mode_residual_shrinks_with_refinement():
    h = TestFunctionSpec(j=0, delta=0.1)
    coarse = QuadConfig(volume_panel=3.0, volume_order=8)
    fine = coarse.replace(volume_panel=1.5)
    r0 = reproducing_residual_mode(P, 0, h, 0.2 - 0.5j, coarse)
    r1 = reproducing_residual_mode(P, 0, h, 0.2 - 0.5j, fine)
    assert r1 <= r0 + 1e-12


def test_reproduce_mode_rejects_outside_point():
    with pytest.raises(DomainError):
        reproduce_mode(P, 0, TestFunctionSpec(), 5j)


def test_full_residual_zero_function():
    f = TestFunctionSpec(amplitude=0.0)
    assert reproducing_residual_full(P, f, PointC2(0.2 + 0.1j, 1.1)) == 0.0


def test_gaussian_test_function():
    f = TestFunctionSpec(TestKind.PlainGaussian, j=3, delta=0.5, center=1.0)
    assert f.j == 0
    assert f(1.0, 2.0) == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        TestFunctionSpec(delta=0.0)
    g = TestFunctionSpec(j=2, delta=0.1)
    assert abs(g.strip_value(g.truncation(P) + 1j * BETA)) < math.exp(-40) * 1.01


def test_lp_range_examples():
    r = lp_bounded_range(P)
    assert (r.p_min, r.p_max) == (4.0 / 3.0, 4.0)
    assert r.contains(2.0) and not r.contains(4.5)
    with pytest.raises(DomainError):
        lp_bounded_range(DomainParams(math.pi))


def test_lp_range_tends_to_two():
    widths = [lp_bounded_range(DomainParams(b)).p_max - 2 for b in (2 * math.pi, 10 * math.pi, 100 * math.pi, 1e4)]
    assert np.all(np.diff(widths) < 0) and widths[-1] < 1e-3


@given(beta=st.floats(math.pi + 1e-6, 1e6))
def test_lp_range_conjugate(beta):
    r = lp_bounded_range(DomainParams(beta))
    assert 1 / r.p_min + 1 / r.p_max == pytest.approx(1.0, abs=1e-15)
    assert r.p_min < 2 < r.p_max


def test_lp_scan_input_validation():
    with pytest.raises(ConfigurationError):
        lp_blowup_scan(D, 0.5, ZETA)
    with pytest.raises(ConfigurationError):
        lp_blowup_scan(D, 2.0, ZETA, regime="sideways")
    with pytest.raises(ConfigurationError):
        lp_blowup_scan(D, 2.0, ZETA, radii=[1.0, 0.5, 0.25])
    with pytest.raises(ConfigurationError):
        lp_blowup_scan(D, 2.0, ZETA, radii=[0.2, 0.4, 0.8, 1.6])


def test_lp_verdict_validation():
    with pytest.raises(ValueError):
        LpVerdict(2.0, (0.0, 2.0, 1.0), Trend.ConvergentTrend)
    assert NuBetaRange(1.5, 3.0).contains(3.0)


def test_lp_scan_partitions_at_endpoints():
    r = lp_bounded_range(D)
    cases = [
        (r.p_min - 0.2, "outer", Trend.DivergentTrend),
        (r.p_min + 0.2, "outer", Trend.ConvergentTrend),
        (2.0, "inner", Trend.ConvergentTrend),
        (r.p_max - 0.2, "inner", Trend.ConvergentTrend),
        (r.p_max + 0.2, "inner", Trend.DivergentTrend),
    ]
    for p, regime, want in cases:
        v = lp_blowup_scan(D, p, ZETA, regime=regime)
        assert v.verdict is want, (p, regime, v.increment_exponent)
        assert len(v.partial_integrals) == len(v.radii)


def test_decay_fit_example_and_consistency():
    fit = decay_exponent_fit(P, -1, (10.0, 30.0))
    assert fit.slope == pytest.approx(-0.5, abs=0.01)
    denser = decay_exponent_fit(P, -1, (10.0, 30.0), points=21)
    assert abs(denser.slope - fit.slope) < fit.stderr
    wider = decay_exponent_fit(P, -1, (10.0, 50.0))
    assert wider.slope == pytest.approx(-P.nu, rel=0.02)
    with pytest.raises(ConfigurationError):
        decay_exponent_fit(P, -1, (10.0, 30.0), points=5)


def test_fit_exponent_recovers_power_law():
    x = np.linspace(0, 5, 11)
    fit = fit_exponent(x, 3.0 * np.exp(-0.7 * x))
    assert fit.slope == pytest.approx(-0.7) and fit.stderr < 1e-12
    with pytest.raises(ValueError):
        ExponentFit(1.0, 0.0, (0, 1), 3)


def test_noisy_fit_raises():
    from wormkit.analysis import _check_fit

    with pytest.raises(AccuracyError):
        _check_fit(ExponentFit(0.1, 0.05, (0, 1), 6))


def test_stroboscopic_sequence():
    t = stroboscopic_sequence(-1.0, 4)
    assert np.allclose(np.diff(np.log(t)), -4 * math.pi)


def test_blowup_fit_independent_of_zeta():
    t = stroboscopic_sequence(n=5)
    a = blowup_exponent_fit(D, PointC2(1.0, 1.0), t)
    b = blowup_exponent_fit(D, PointC2(np.exp(0.5 + 0.3j), np.exp(0.2)), t)
    assert a.slope == pytest.approx(-0.5, abs=0.03)
    assert abs(a.slope - b.slope) < 3 * (a.stderr + b.stderr) + 2e-3


def test_rotation_residual():
    z, w = PointC2(0.2 + 0.1j, 1.1), PointC2(-0.3 + 0.4j, 0.9)
    assert rotation_invariance_residual(P, z, w, 0.0) == 0.0
    res = []
    for th in np.linspace(0.1, 2 * math.pi, 6):
        r, e = rotation_invariance_residual(P, z, w, th, with_error=True)
        assert r <= e
        res.append(r)
    assert max(res) < 1e-14


def test_singularity_scan():
    t = np.geomspace(1e-1, 1e-3, 9)
    rows = singularity_scan(D, PointC2(1.0, 1.0), 1.0, t)
    mags = [m for _, m, _ in rows]
    assert np.all(np.diff(mags) > 0)
    assert singularity_scan(D, PointC2(1.0, 1.0), 1.0, t) == rows
    with pytest.raises(DomainError):
        singularity_scan(D, PointC2(1.0, 1.0), math.exp(D.mu), t)


@pytest.mark.xfail(strict=True, reason="at beta = pi the transform has a double pole, so H_{-1} ~ x e^{-x} and a pure exponential fit over [10, 30] gives about -0.94")
def test_decay_fit_beta_pi_plain_exponential():
    fit = decay_exponent_fit(DomainParams(math.pi), -1, (10.0, 30.0))
    assert fit.slope == pytest.approx(-1.0, abs=0.02)


def test_decay_beta_pi_with_linear_prefactor():
    from wormkit.kernel import h_j

    P1 = DomainParams(math.pi)
    xs = np.linspace(10.0, 30.0, 11)
    v = np.array([abs(h_j(P1, -1, complex(x), 0j).value) for x in xs])
    fit = fit_exponent(xs, v / xs)
    assert fit.slope == pytest.approx(-1.0, abs=0.02)
