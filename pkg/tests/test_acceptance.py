"""Acceptance gate: one PASS/FAIL line per criterion at the stated tolerances."""
import filecmp
import time

import numpy as np
import pytest

import conftest
from relasym.asymptotics import (
    QUANTITIES,
    SCALAR_QUANTITIES,
    RayFamily,
    constant_perturbation,
    index_records,
    mnt_baseline,
    szego_baseline,
)
from relasym.cli import main as cli
from relasym.cli.cache import BundleProvider
from relasym.cli.config import PrecisionSettings, parse_weight
from relasym.contours import ellipse_contour
from relasym.fixedpoint import apply_T, constant_phi, metric_d, random_pair, solve_phi
from relasym.nikishin import MultiIndex
from relasym.orthopoly import VaryingMeasure, monic_orthogonal, orthonormal_eval
from relasym.precision import PrecisionConfig, arith_for_bits
from relasym.roots import roots_in_interval
from relasym.szego import boundary_modulus_check, szego_function
from relasym.tn_operator import verify_fixed_point
from relasym.weights import ARCSINE, Interval, MeasureSpec

DIAG = RayFamily("diag", 1, 12)
STEP = RayFamily("step", 0, 11)
MAX_SIZE = 24


def report(k, passed, detail):
    line = f"ACCEPTANCE {k} {'PASS' if passed else 'FAIL'}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def provider():
    # bundles are shared between criteria 1, 5 and 6
    return BundleProvider(PrecisionSettings())


# -- 1 ---------------------------------------------------------------------------


def _mop_ok(sys_, b):
    n = b.index
    tol = b.cfg.residual_tol
    if max(b.residuals) > tol:
        return False, f"residual {max(b.residuals):.2e} > {tol:g} at {n}"
    for P, iv, count in ((b.Q1, sys_.delta1, n.N1), (b.Q2, sys_.delta2, n.N2)):
        if count == 0:
            continue
        z = np.sort(np.array([float(r) for r in roots_in_interval(P, iv, count, b.cfg)]))
        if len(z) != count or z[0] <= iv.a or z[-1] >= iv.b or np.any(np.diff(z) <= 0):
            return False, f"zeros at {n}"
    return True, ""


@pytest.mark.parametrize("ray", [DIAG, STEP], ids=["diag", "step"])
def test_criterion_1_mop_correctness(generic_system, provider, ray):
    t0 = time.perf_counter()
    worst53, worst_ext, bad = 0.0, 0.0, []
    for n in ray.indices(MAX_SIZE):
        for pert in (False, True):
            b = provider(generic_system, n, pert)
            ok, why = _mop_ok(generic_system, b)
            if not ok:
                bad.append(why)
            r = max(b.residuals)
            if b.cfg.extended:
                worst_ext = max(worst_ext, r)
            else:
                worst53 = max(worst53, r)
    dt = time.perf_counter() - t0
    report(1, not bad and dt < 60,
           f"ray {ray.label} |n|<=24: max residual 53-bit {worst53:.1e} (<=1e-10), extended {worst_ext:.1e} "
           f"(<=1e-20), zero counts exact and simple{'' if not bad else ' except ' + '; '.join(bad)}, "
           f"{dt:.1f}s (<60s)")


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_szego():
    iv = Interval(-1, 1)
    z = ellipse_contour(iv, 20, 0.5)
    const_err = max(float(np.max(np.abs(szego_function(iv, c)(z) - c**-0.5))) for c in (0.3, 1.0, 2.0, 7.5))
    arith = arith_for_bits(53)
    bdev = 0.0
    for text in ("rational(2 + x)", "exp(0.5*x)", "abs(x)"):
        w = parse_weight(text)
        S = szego_function(iv, w)
        for x in iv.chebyshev_points(10):
            lhs, rhs = boundary_modulus_check(S, float(x), float(w.evaluate(np.array([x]), iv, arith)[0]))
            bdev = max(bdev, abs(lhs - rhs) / rhs)
    a, b = parse_weight("rational(2 + x)"), parse_weight("exp(0.5*x) * abs(x)")
    Sa, Sb = szego_function(iv, a), szego_function(iv, b)
    mult = float(np.max(np.abs(szego_function(iv, a * b)(z) / (Sa(z) * Sb(z)) - 1)))
    scale = float(np.max(np.abs(szego_function(iv, parse_weight("const(3)") * a)(z) / (3**-0.5 * Sa(z)) - 1)))
    ok = const_err <= 1e-12 and bdev <= 1e-6 and mult <= 1e-10 and scale <= 1e-10
    report(2, ok, f"constant {const_err:.1e} (<=1e-12), boundary modulus {bdev:.1e} (<=1e-6), "
                  f"multiplicativity {mult:.1e}, scaling {scale:.1e} (<=1e-10)")


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_contraction(generic_system):
    rng = np.random.default_rng(3)
    d1, d2 = generic_system.delta1, generic_system.delta2
    rho1, rho2 = generic_system.rho1, generic_system.rho2
    worst = 0.0
    for _ in range(100):
        f, g = random_pair(d1, d2, rng, amplitude=1.5), random_pair(d1, d2, rng, amplitude=1.5)
        worst = max(worst, metric_d(apply_T(rho1, rho2, f), apply_T(rho1, rho2, g)) / metric_d(f, g))
    res = solve_phi(rho1, rho2, d1, d2, tol=1e-10)
    c1, c2 = 2.0, 5.0
    cres = solve_phi(parse_weight("const(2)"), parse_weight("const(5)"), d1, d2, tol=1e-10)
    p1, p2 = c1 ** (-2 / 3) * c2 ** (-1 / 3), c1 ** (-1 / 3) * c2 ** (-2 / 3)
    cdev = max(np.max(np.abs(cres.phi.f1 - p1)), np.max(np.abs(cres.phi.f2 - p2)))
    ok = worst <= 0.5 + 1e-6 and res.residual <= 2e-10 and cdev <= 1e-10
    assert constant_phi(c1, c2) == pytest.approx((p1, p2), rel=1e-14)
    report(3, ok, f"max ratio {worst:.6f} over 100 pairs (<=0.5+1e-6), residual {res.residual:.1e} (<=2e-10), "
                  f"constant closed form {cdev:.1e} (<=1e-10)")


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_tn_fixed_points(plain_system, generic_system, abs_system):
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    idx = DIAG.indices(12) + [n for n in STEP.indices(12) if n.n1 <= 6]
    for name, sys_ in (("(1,1)", plain_system), ("(x+2,e^(x/2))", generic_system), ("(|x|,e^(x/2))", abs_system)):
        for n in idx:
            r = verify_fixed_point(sys_, n, tol=1e-8)
            worst = max(worst, r.tn_residual, r.ttilde_residual)
            if not r.passed:
                bad.append(f"{name} {n}")
    dt = time.perf_counter() - t0
    report(4, not bad and dt < 120,
           f"{3 * len(idx)} cases up to (6,6): max residual {worst:.1e} (<=1e-8)"
           f"{'' if not bad else ', failing ' + ', '.join(bad)}, {dt:.1f}s (<120s)")


# -- 5 and 6 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def generic_phi(generic_system):
    s = generic_system
    return solve_phi(s.rho1, s.rho2, s.delta1, s.delta2, tol=1e-12)


@pytest.fixture(scope="module")
def diag_records(generic_system, generic_phi, provider):
    return {n.size: {r.quantity: r for r in index_records(generic_system, n, phi=generic_phi, provider=provider)}
            for n in DIAG.indices(MAX_SIZE)}


def test_criterion_5_generic_convergence(diag_records):
    e8, e24 = diag_records[8]["Qratio1"].sup_error, diag_records[24]["Qratio1"].sup_error
    rel = {q: diag_records[24][q].sup_error / abs(diag_records[24][q].predicted[0]) for q in SCALAR_QUANTITIES}
    ok = e24 <= 0.5 * e8 and max(rel.values()) <= 0.05
    report(5, ok, f"Qratio1 sup error {e24:.2e} at |n|=24 vs {e8:.2e} at |n|=8 (ratio {e24 / e8:.3f} <= 0.5); "
                  f"scalar limits max relative error {max(rel.values()):.1e} at |n|=24 (<=5%)")


def test_criterion_5_constant_control(constant_system):
    const = constant_perturbation(constant_system)
    local = BundleProvider(PrecisionSettings())
    worst, count = 0.0, 0
    for ray in (DIAG, STEP):
        for n in ray.indices(MAX_SIZE):
            for r in index_records(constant_system, n, QUANTITIES, exact_constants=const, provider=local):
                worst = max(worst, r.sup_error)
                count += 1
    report(5, worst <= 1e-8, f"constant control rho=(2,5): {count} records, twelve quantities on both rays "
                             f"|n|<=24, max error {worst:.1e} (<=1e-8)")


def test_criterion_6_h_limits(diag_records):
    parts, ok = [], True
    for q in ("hLimit2", "hLimit3"):
        seq = [diag_records[s][q].sup_error for s in sorted(diag_records)]
        mono = bool(np.all(np.diff(seq) < 0))
        ok = ok and seq[-1] <= 0.05 and mono
        parts.append(f"{q} {seq[-1]:.2e} at |n|=24 (<=0.05), {'strictly decreasing' if mono else 'NOT monotone'}")
    report(6, ok, "; ".join(parts))


# -- 7 ---------------------------------------------------------------------------


def test_criterion_7_baselines():
    iv = Interval(-1, 1)
    arcsine, lebesgue = MeasureSpec(iv, ARCSINE), MeasureSpec(iv)
    # oracle: t_0 = 1/sqrt(pi), t_n = sqrt(2/pi) cos(n theta)
    theta = np.linspace(0.1, 3.0, 12)
    x = np.cos(theta)
    arc = 0.0
    for n in range(0, 41):
        r = monic_orthogonal(VaryingMeasure(arcsine), n, PrecisionConfig.for_degree(n, 53))
        t = np.full_like(x, 1 / np.sqrt(np.pi)) if n == 0 else np.sqrt(2 / np.pi) * np.cos(n * theta)
        arc = max(arc, float(np.max(np.abs(orthonormal_eval(r, x.astype(complex)) - t))))
    z = np.concatenate([[2.0 + 0j], ellipse_contour(iv, 16, 0.5)])
    c = 3.0
    mnt = max(float(np.max(np.abs(r.observed - c**-0.5)))
              for r in mnt_baseline(lebesgue, parse_weight("const(3)"), range(4, 41), z))
    leb = [float(r.errors[0]) for r in szego_baseline(lebesgue, range(4, 41), z)]
    dec = bool(np.all(np.diff(leb) < 0))
    absx = float(mnt_baseline(arcsine, parse_weight("abs(x)"), [40], z)[0].errors[0])
    ok = arc <= 1e-12 and mnt <= 1e-10 and dec
    report(7, ok, f"arcsine t_n deviation {arc:.1e} for n<=40; MNT g=3 ratio error {mnt:.1e} (<=1e-10); "
                  f"Lebesgue error at z=2 {leb[0]:.2e} -> {leb[-1]:.2e} "
                  f"{'strictly decreasing' if dec else 'NOT decreasing'}; MNT |x| at n=40 {absx:.1e} (<0.02)")
    assert absx < 0.02


# -- 8 ---------------------------------------------------------------------------

DET_CONFIG = """\
format_version: 1
system:
  sigma1: {interval: [-1, 1]}
  sigma2: {interval: [2, 3]}
  rho1: "rational(2 + x)"
  rho2: "exp(0.5*x)"
ray: {kind: diag, m: [1, 4]}
baseline: {n: [4, 20]}
"""


def test_criterion_8_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("RELASYM_CACHE_DIR", raising=False)
    cfg = tmp_path / "run.yaml"
    cfg.write_text(DET_CONFIG)
    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = []
    for d in dirs:
        for cmd in cli.SUBCOMMANDS:
            codes.append(cli.main([cmd, "--config", str(cfg), "--out", str(d), "--no-cache"]))
    csvs = sorted(p.name for p in dirs[0].glob("*.csv"))
    same = [filecmp.cmp(dirs[0] / name, dirs[1] / name, shallow=False) for name in csvs]
    ok = all(c == 0 for c in codes) and len(csvs) == 6 and all(same)
    report(8, ok, f"{len(csvs)} CSVs from two runs of all six subcommands, "
                  f"{sum(same)} byte-identical, exit codes {sorted(set(codes))}")
