"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from wormkit.analysis import (
    TestFunctionSpec,
    TestKind,
    Trend,
    blowup_exponent_fit,
    calibrate_c_norm,
    decay_exponent_fit,
    lp_blowup_scan,
    lp_bounded_range,
    reproducing_residual_full,
    reproducing_residual_mode,
    stroboscopic_sequence,
)
from wormkit.cli import run
from wormkit.domains import (
    DomainParams,
    EtaProfile,
    PointC2,
    TangentVector,
    Variant,
    levi_form,
    map_prime_to_unprime,
    rho,
    sample_annulus,
    sample_boundary,
    sample_interior,
    tangential_levi_form,
)
from wormkit.kernel import kernel_prime_array, kernel_unprime_array
from wormkit.modes import WeightProfile, lambda_hat, lambda_hat_quadrature
from wormkit.potential import ExhaustionQuery, exhaustion_feasibility, ode_positivity_check
from wormkit.quad import QuadConfig

pytestmark = pytest.mark.slow

BETAS = {"5pi/4": 1.25 * math.pi, "3pi/2": 1.5 * math.pi, "2pi": 2.0 * math.pi}
SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_01_weight_transform_identity(report):
    t0 = time.perf_counter()
    worst = 0.0
    xi = np.linspace(-10, 10, 41)
    for beta in BETAS.values():
        for j in range(-3, 4):
            w = WeightProfile(beta, j)
            exact = lambda_hat(w, xi)
            worst = max(worst, float(np.max(np.abs(exact - lambda_hat_quadrature(w, xi)) / np.abs(exact))))
    dt = time.perf_counter() - t0
    report(1, worst < 1e-8 and dt < 10, f"max relative error {worst:.2e} (< 1e-8), {dt:.2f} s (< 10 s)")


def test_02_per_mode_reproducing(report):
    t0 = time.perf_counter()
    c = calibrate_c_norm().c_norm
    P = DomainParams(BETAS["3pi/2"])
    worst = 0.0
    for j in (-2, -1, 0, 1):
        h = TestFunctionSpec(TestKind.GaussianMode, j, 0.1)
        for z in (0.3 + 0.2j, -1.0 + 1.5j, 2.0 - 3.0j):
            worst = max(worst, reproducing_residual_mode(P, j, h, z, c_norm=c))
    dt = time.perf_counter() - t0
    report(2, worst < 1e-3 and dt < 120, f"c_norm {c:.10f}, max residual {worst:.2e} (< 1e-3), {dt:.1f} s (< 120 s)")


def test_03_full_reproducing(report):
    t0 = time.perf_counter()
    P = DomainParams(BETAS["3pi/2"])
    z = PointC2(0.2 + 0.1j, 1.1)
    res = [reproducing_residual_full(P, TestFunctionSpec(TestKind.GaussianMode, j, 0.1), z) for j in (-1, 2)]
    dt = time.perf_counter() - t0
    report(3, max(res) < 5e-3 and dt < 300, f"residuals {res[0]:.2e}, {res[1]:.2e} (< 5e-3), {dt:.1f} s (< 300 s)")


def test_04_decay_exponent(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, beta in BETAS.items():
        P = DomainParams(beta)
        fit = decay_exponent_fit(P, -1, (10.0, 30.0))
        err = abs(fit.slope + P.nu) / P.nu
        ok &= err < 0.02
        parts.append(f"{name}: {fit.slope:.4f} vs {-P.nu:.4f} ({100 * err:.2f}%)")
    dt = time.perf_counter() - t0
    report(4, ok and dt < 60, "; ".join(parts) + f"; {dt:.1f} s")


def test_05_blowup_exponent(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("3pi/2", "5pi/4"):
        D = DomainParams(BETAS[name], Variant.DBeta)
        fit = blowup_exponent_fit(D, PointC2(1.0, 1.0), stroboscopic_sequence())
        want = D.nu - 1.0
        err = abs(fit.slope - want) / abs(want)
        ok &= err < 0.05
        parts.append(f"{name}: {fit.slope:.4f} vs {want:.4f} ({100 * err:.2f}%)")
    dt = time.perf_counter() - t0
    report(5, ok and dt < 180, "; ".join(parts) + f"; {dt:.1f} s")


def test_06_lp_range(report):
    t0 = time.perf_counter()
    D = DomainParams(BETAS["3pi/2"], Variant.DBeta)
    r = lp_bounded_range(D)
    zeta = PointC2(np.exp(-2j), np.exp(-1.25))
    verdicts = {p: lp_blowup_scan(D, p, zeta) for p in (2.0, 3.0, 4.5)}
    ok = (r.p_min, r.p_max) == (4.0 / 3.0, 4.0)
    ok &= verdicts[4.5].verdict is Trend.DivergentTrend
    ok &= verdicts[2.0].verdict is Trend.ConvergentTrend and verdicts[3.0].verdict is Trend.ConvergentTrend
    dt = time.perf_counter() - t0
    detail = f"range ({r.p_min!r}, {r.p_max!r}); " + ", ".join(
        f"p={p}: {v.verdict.value} (slope {v.increment_exponent:+.3f})" for p, v in verdicts.items()
    )
    report(6, ok and dt < 300, detail + f"; {dt:.1f} s")


def test_07_exhaustion_threshold(report):
    t0 = time.perf_counter()
    wrong = bad_witness = 0
    for mu in np.linspace(0.05, 10.0, 100):
        for delta in np.linspace(0.01, 1.0, 100):
            v = exhaustion_feasibility(ExhaustionQuery(float(mu), float(delta)))
            wrong += v.feasible != (mu * delta < math.pi / 2)
            if v.feasible and not ode_positivity_check(delta, mu, v.witness):
                bad_witness += 1
    dt = time.perf_counter() - t0
    report(7, wrong == 0 and bad_witness == 0 and dt < 5, f"{wrong} misclassified, {bad_witness} failed witnesses of 10000, {dt:.2f} s (< 5 s)")


def _levi_fd(eta, p, v, h=None):
    # rho varies on the scale |z2| in the z2 direction
    h = 5e-4 * min(1.0, abs(p.z2)) if h is None else h
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    steps = np.arange(-2, 3) * h
    total = 0.0
    for unit in (1.0, 1j):
        vals = [rho(eta, PointC2(p.z1 + t * unit * v.v1, p.z2 + t * unit * v.v2)) for t in steps]
        total += float(np.dot(c, vals))
    return total / 4.0


def test_08_levi_degeneracy(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    eta = EtaProfile.default(BETAS["3pi/2"])
    ann = np.max(np.abs(tangential_levi_form(eta, sample_annulus(eta.mu, 100, rng))))
    bd = np.min(tangential_levi_form(eta, sample_boundary(eta, 100, rng, exclude_annulus=True)))
    pts = sample_boundary(eta, 50, rng)
    fd = 0.0
    for z1, z2 in zip(pts.z1, pts.z2):
        for p in (PointC2(z1, z2), PointC2(0.5 * z1 + 0.5 * np.exp(1j * np.log(abs(z2) ** 2)), z2)):
            u = rng.normal(size=2) + 1j * rng.normal(size=2)
            v = TangentVector(*(u / np.linalg.norm(u)))
            fd = max(fd, abs(levi_form(eta, p, v) - _levi_fd(eta, p, v)))
    dt = time.perf_counter() - t0
    ok = ann < 1e-12 and bd > 0 and fd < 1e-6 and dt < 30
    report(8, ok, f"annulus max |L| {ann:.1e} (< 1e-12), boundary min L {bd:.3e} (> 0), FD gap {fd:.1e} (< 1e-6), {dt:.1f} s")


def test_09_symmetry_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    P = DomainParams(BETAS["3pi/2"])
    D = P.with_variant(Variant.DBeta)
    cfg = QuadConfig(mode_cap=120)
    n = 50
    z = sample_interior(P, n, rng, x_range=2.0, margin=0.3)
    w = sample_interior(P, n, rng, x_range=2.0, margin=0.3)
    theta = rng.uniform(0, 2 * math.pi, n)

    kzw, ezw, _ = kernel_prime_array(P, z, w, cfg)
    kwz, ewz, _ = kernel_prime_array(P, w, z, cfg)
    herm = int(np.sum(np.abs(kzw - np.conj(kwz)) > ezw + ewz))

    kzz, ezz, _ = kernel_prime_array(P, z, z, cfg)
    diag = int(np.sum((kzz.real <= 0) | (np.abs(kzz.imag) > ezz)))

    rz = PointC2(z.z1, np.exp(1j * theta) * z.z2)
    rw = PointC2(w.z1, np.exp(1j * theta) * w.z2)
    krot, erot, _ = kernel_prime_array(P, rz, rw, cfg)
    rot = int(np.sum(np.abs(krot - kzw) > ezw + erot))

    (Z, jz), (W, jw) = map_prime_to_unprime(z), map_prime_to_unprime(w)
    ku, eu, _ = kernel_unprime_array(D, Z, W, cfg)
    jac = jz * np.conj(jw)
    trans = int(np.sum(np.abs(jac * ku - kzw) > ezw + np.abs(jac) * eu))

    dt = time.perf_counter() - t0
    ok = herm == diag == rot == trans == 0 and dt < 180
    report(9, ok, f"failures of {n}: hermitian {herm}, diagonal {diag}, rotation {rot}, transformation {trans}; {dt:.1f} s")


SUITE = [
    ["kernel-eval", "--beta", "4.712", "--z", "0.2+0.1i,1.1", "--w", "0,1", "-o", "kernel.json"],
    ["mode-kernel", "--beta", "3*pi/2", "--n", "11", "-o", "mode_kernel.csv"],
    ["weight", "--beta", "3*pi/2", "--kind", "lambda-hat", "-o", "weight.csv"],
    ["repro-test", "--beta", "3*pi/2", "--j", "0", "-o", "repro.json"],
    ["lp-range", "--beta", "3*pi/2", "-o", "lp_range.json"],
    ["lp-scan", "--beta", "3*pi/2", "--p", "2", "-o", "lp_scan.csv"],
    ["decay-fit", "--beta", "3*pi/2", "-o", "decay.csv"],
    ["blowup-fit", "--beta", "3*pi/2", "-o", "blowup.csv"],
    ["rotation-check", "--beta", "3*pi/2", "-o", "rotation.json"],
    ["singularity-scan", "--beta", "3*pi/2", "-o", "singularity.csv"],
    ["levi", "--beta", "3*pi/2", "--n", "20", "--seed", "7", "-o", "levi.csv"],
    ["exhaustion", "--mu", "pi", "--delta", "0.4", "-o", "exhaustion.json"],
    ["grid-dump", "--beta", "3*pi/2", "--domain-truncation", "2", "--theta-nodes", "8", "-o", "grid.csv"],
]


def _run_suite(directory: Path, monkeypatch):
    directory.mkdir()
    monkeypatch.chdir(directory)
    codes = [run(argv) for argv in SUITE]
    files = {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if not p.name.endswith(".manifest.json")}
    manifests = {}
    for p in sorted(directory.glob("*.manifest.json")):
        m = json.loads(p.read_text())
        m.pop("wall_time_s")
        manifests[p.name] = m
    return codes, files, manifests


def test_10_determinism(report, tmp_path, monkeypatch):
    monkeypatch.delenv("WORMKIT_THREADS", raising=False)
    c1, f1, m1 = _run_suite(tmp_path / "a", monkeypatch)
    c2, f2, m2 = _run_suite(tmp_path / "b", monkeypatch)
    monkeypatch.setenv("WORMKIT_THREADS", "4")
    c3, f3, _ = _run_suite(tmp_path / "c", monkeypatch)
    ok = set(c1 + c2 + c3) == {0} and len(f1) == len(SUITE)
    ok &= f1 == f2 == f3 and m1 == m2
    diff = sorted(k for k in f1 if f1[k] != f2.get(k) or f1[k] != f3.get(k))
    report(10, ok, f"{len(f1)} output files across 3 runs (threads 1, 1, 4); differing: {diff or 'none'}; manifests equal: {m1 == m2}")
