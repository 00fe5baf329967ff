import mpmath
import numpy as np
import pytest
from numpy.polynomial import polynomial as P
from scipy.special import roots_jacobi

from relasym.branches import exterior_map, interval_sqrt
from relasym.chebpoly import ChebPoly
from relasym.errors import InvalidWeight, RootCountMismatch, SingularGram
from relasym.linalg import solve
from relasym.precision import PrecisionConfig, arith_for_bits, extended_bits_for_degree
from relasym.quadrature import gauss_jacobi, integrate, log_equilibrium_integral, measure_rule
from relasym.roots import roots_in_interval
from relasym.weights import (
    ARCSINE,
    AbsPolyFactor,
    Constant,
    ExpPoly,
    Interval,
    JacobiEdge,
    MeasureSpec,
    RationalPositive,
    weight,
)

F64 = arith_for_bits(53)
MP = arith_for_bits(128)


# -- intervals and weights ------------------------------------------------------


def test_interval_maps_and_points():
    iv = Interval(2, 3)
    assert iv.mid == 2.5 and iv.half == 0.5
    assert iv.from_unit(iv.to_unit(2.2)) == pytest.approx(2.2)
    x = iv.chebyshev_points(9)
    assert np.all(np.diff(x) > 0) and x[0] > 2 and x[-1] < 3
    assert iv.distance(2.5 + 1j) == pytest.approx(1.0)
    assert iv.distance(4.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Interval(1, 1)


def test_factor_validation():
    with pytest.raises(InvalidWeight):
        Constant(0)
    with pytest.raises(InvalidWeight):
        JacobiEdge(-1.0, 0.0)
    with pytest.raises(InvalidWeight):
        AbsPolyFactor((1.0, 2.0))  # not monic
    with pytest.raises(InvalidWeight):
        weight(RationalPositive((0.0, 1.0))).validate(Interval(-1, 1))  # vanishes at 0


def test_weight_evaluate_matches_direct_formula():
    iv = Interval(-1, 1)
    x = np.linspace(-0.9, 0.9, 7)
    w = weight(Constant(3.0), JacobiEdge(1.0, 2.0), AbsPolyFactor((-0.25, 0.0, 1.0), 0.5),
               ExpPoly((0.0, 0.5)), RationalPositive((2.0, 1.0), (4.0, 0.0, 1.0)))
    direct = 3 * (1 - x) * (x + 1) ** 2 * np.abs(x * x - 0.25) ** 0.5 * np.exp(0.5 * x) * (2 + x) / (4 + x * x)
    assert np.allclose(w.evaluate(x, iv, F64), direct, rtol=1e-14)
    mp = MP.to_float(w.evaluate(MP.real(x), iv, MP))
    assert np.allclose(mp, direct, rtol=1e-14)


def test_log_decomposition_reassembles_weight():
    iv = Interval(-1, 1)
    w = weight(Constant(2.0), JacobiEdge(0.5, -0.5), AbsPolyFactor((0.0, 1.0)), RationalPositive((2.0, 1.0)))
    scales, terms, q = w.log_decomposition(iv)
    x = 0.3
    val = np.prod([c if c > 0 else 1 / -c for c in scales])
    for t in terms:
        val *= abs(x - complex(t.root)) ** t.exponent
    val *= np.exp(P.polyval(x, q))
    assert val == pytest.approx(float(w.evaluate(np.array([x]), iv, F64)[0]), rel=1e-14)


# -- quadrature -----------------------------------------------------------------


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (-0.5, -0.5), (0.5, -0.3), (1.5, 2.0)])
def test_gauss_jacobi_matches_scipy(alpha, beta):
    x, w = gauss_jacobi(20, alpha, beta, 53)
    xs, ws = roots_jacobi(20, alpha, beta)
    assert np.allclose(x, xs, atol=1e-14)
    assert np.allclose(w, ws, rtol=1e-12)


def test_extended_gauss_jacobi_moments_exact():
    # reference moments from mpmath quadrature at 40 digits
    a, b = 0.5, -0.3
    x, w = gauss_jacobi(16, a, b, 128)
    with mpmath.workdps(40):
        for k in (0, 1, 7, 20):
            exact = mpmath.quad(lambda t: (1 - t) ** a * (1 + t) ** b * t**k, [-1, 0, 1])
            got = sum(wi * xi**k for xi, wi in zip(x, w))
            assert abs(got - exact) < mpmath.mpf(10) ** -28 * max(1, abs(exact))


def test_measure_rules_known_integrals():
    iv = Interval(-1, 1)
    # arcsine mass is pi
    r = measure_rule(MeasureSpec(iv, ARCSINE), 32)
    assert r.mass == pytest.approx(np.pi, rel=1e-14)
    # interior zero: int |x| x^2 dx = 1/2
    r = measure_rule(MeasureSpec(iv, weight(AbsPolyFactor((0.0, 1.0)))), 32)
    assert r.integrate_values(r.nodes**2) == pytest.approx(0.5, rel=1e-14)
    # smooth integrand against Lebesgue
    assert integrate(np.exp, MeasureSpec(iv)) == pytest.approx(np.e - 1 / np.e, rel=1e-14)


def test_log_equilibrium_integral_closed_forms():
    iv = Interval(-1, 1)
    assert log_equilibrium_integral(weight(Constant(1.0)), iv) == pytest.approx(0.0, abs=1e-15)
    # int log|x| dx/sqrt(1-x^2) = -pi log 2
    assert log_equilibrium_integral(weight(AbsPolyFactor((0.0, 1.0))), iv) == pytest.approx(-np.pi * np.log(2), rel=1e-14)
    # int x^2 dx/sqrt(1-x^2) = pi/2
    assert log_equilibrium_integral(weight(ExpPoly((0.0, 0.0, 1.0))), iv) == pytest.approx(np.pi / 2, rel=1e-14)


# -- dense solves -----------------------------------------------------------------


def test_solve_float_matches_numpy(rng):
    A = rng.normal(size=(12, 12))
    b = rng.normal(size=12)
    assert np.allclose(solve(A, b), np.linalg.solve(A, b), rtol=1e-12)


def test_solve_extended_hilbert():
    n = 12
    ctx = MP.ctx
    A = np.array([[ctx.mpf(1) / (i + j + 1) for j in range(n)] for i in range(n)], dtype=object)
    x_true = np.array([ctx.mpf(i + 1) for i in range(n)], dtype=object)
    x = solve(A, A @ x_true)
    assert max(abs(float(v - t)) for v, t in zip(x, x_true)) < 1e-20


def test_solve_singular_raises():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularGram):
        solve(A, np.ones(2))


# -- precision ------------------------------------------------------------------------


def test_precision_ladder():
    assert PrecisionConfig.for_degree(12).mantissa_bits == 53
    assert PrecisionConfig.for_degree(13).mantissa_bits == extended_bits_for_degree(13) >= 113
    with pytest.raises(ValueError):
        PrecisionConfig(mantissa_bits=80)
    with pytest.raises(ValueError):
        PrecisionConfig(quad_order=8).check_degree(10)
    cfg = PrecisionConfig().with_bits(192)
    assert cfg.extended and cfg.residual_tol == 1e-20


# -- polynomials, roots, branches ------------------------------------------------------


def test_chebpoly_from_roots_and_monomials():
    iv = Interval(2, 3)
    roots = [2.1, 2.5, 2.9]
    Q = ChebPoly.from_roots(roots, iv, F64)
    x = np.linspace(1.5, 3.5, 9)
    assert np.allclose(Q(x), np.prod([x - r for r in roots], axis=0), atol=1e-13)
    assert np.allclose(Q.monomial_coeffs(), P.polyfromroots(roots), atol=1e-12)
    assert Q.leading_coefficient() == pytest.approx(1.0)
    Qm = Q.with_arith(MP)
    assert float(Qm(MP.real(2.7))) == pytest.approx(float(Q(2.7)), rel=1e-14)


def test_roots_in_interval_chebyshev():
    iv = Interval(-1, 1)
    T7 = ChebPoly(iv, np.eye(8)[7], F64)
    got = np.sort(roots_in_interval(T7, iv, 7))
    want = np.sort(np.cos((np.arange(7) + 0.5) * np.pi / 7))
    assert np.allclose(got, want, atol=1e-13)
    with pytest.raises(RootCountMismatch):
        roots_in_interval(T7, iv, 6)


def test_branches():
    z = np.array([4.0, -3.0 + 0.5j, 2.5 + 2j, 100.0])
    s = interval_sqrt(z, 2.0, 3.0)
    assert np.allclose(s**2, (z - 2) * (z - 3))
    assert s[0].real > 0
    assert abs(s[3] / 100 - 1) < 0.03  # behaves like z at infinity
    phi = exterior_map(np.array([2.0 + 0j, 0.3 + 1e-9j, -5.0 + 0j]))
    assert np.all(np.abs(phi) >= 1 - 1e-8)
    assert phi[0] == pytest.approx(2 + np.sqrt(3))
