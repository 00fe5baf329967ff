import mpmath
import numpy as np
import pytest
from scipy.special import jacobi, legendre

from relasym.errors import InvalidWeight
from relasym.orthopoly import VaryingMeasure, monic_orthogonal, orthonormal_eval
from relasym.precision import PrecisionConfig
from relasym.quadrature import integrate
from relasym.weights import ARCSINE, Interval, JacobiEdge, MeasureSpec, weight

IV = Interval(-1, 1)
X = np.linspace(-1.3, 1.3, 11)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_legendre_monic(n):
    r = monic_orthogonal(VaryingMeasure(MeasureSpec(IV)), n)
    ref = legendre(n)
    assert np.allclose(r.monic(X), ref(X) / ref.coeffs[0], atol=1e-12)
    assert r.residual <= 1e-10


@pytest.mark.parametrize("a,b", [(0.5, -0.3), (-0.5, -0.5), (2.0, 1.0)])
def test_jacobi_monic(a, b):
    n = 7
    r = monic_orthogonal(VaryingMeasure(MeasureSpec(IV, weight(JacobiEdge(a, b)))), n)
    ref = jacobi(n, a, b)
    assert np.allclose(r.monic(X), ref(X) / ref.coeffs[0], atol=1e-12)


def test_arcsine_norms():
    # monic Chebyshev 2^{1-n} T_n with squared norm pi / 2^{2n-1}
    for n in (1, 5, 10):
        r = monic_orthogonal(VaryingMeasure(MeasureSpec(IV, ARCSINE)), n)
        assert float(r.norm) ** 2 == pytest.approx(np.pi / 2 ** (2 * n - 1), rel=1e-13)


def test_extended_precision_high_degree():
    n = 30
    cfg = PrecisionConfig.for_degree(n, 192)
    r = monic_orthogonal(VaryingMeasure(MeasureSpec(IV)), n, cfg)
    with mpmath.workdps(50):
        lead = mpmath.factorial(2 * n) / (2**n * mpmath.factorial(n) ** 2)
        want = mpmath.legendre(n, mpmath.mpf("1.5")) / lead
    got = r.monic(cfg.arith.real(1.5))
    assert abs(float((got - want) / want)) < 1e-30
    assert r.residual <= 1e-20


def test_varying_measure_negative_sign_same_polynomial():
    mu = MeasureSpec(IV)
    pos = monic_orthogonal(VaryingMeasure(mu, lambda x: 2 + x), 5)
    neg = monic_orthogonal(VaryingMeasure(mu, lambda x: -(2 + x)), 5)
    assert neg.sign == -1 and pos.sign == 1
    assert np.allclose(pos.monic(X), neg.monic(X), atol=1e-13)


def test_sign_changing_weight_rejected():
    with pytest.raises(InvalidWeight):
        monic_orthogonal(VaryingMeasure(MeasureSpec(IV), lambda x: x), 3)


def test_orthonormal_is_normalized():
    mu = MeasureSpec(IV, weight(JacobiEdge(0.5, 0.5)))
    r = monic_orthogonal(VaryingMeasure(mu), 6)
    val = integrate(lambda x: orthonormal_eval(r, x) ** 2, mu)
    assert val == pytest.approx(1.0, rel=1e-12)
    assert float(np.real(orthonormal_eval(r, 10.0))) > 0
