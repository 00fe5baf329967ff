import numpy as np
import pytest

from relasym.chebpoly import ChebPoly
from relasym.errors import InvalidClass, NotInSnPlus
from relasym.nikishin import MultiIndex, coeff_distance, mop_bundle
from relasym.precision import PrecisionConfig
from relasym.tn_operator import PolyPair, apply_Tn, apply_Ttilde, c_constants, verify_fixed_point


@pytest.mark.parametrize("n", [(1, 1), (2, 2), (3, 2)])
def test_unperturbed_fixed_point(plain_system, n):
    r = verify_fixed_point(plain_system, n)
    assert r.tn_residual <= 1e-10 and r.ttilde_residual <= 1e-10
    assert r.c == pytest.approx((1.0, 1.0), rel=1e-10)
    assert r.passed


def test_generic_fixed_point(generic_system):
    r = verify_fixed_point(generic_system, (3, 3))
    assert r.passed, r.as_dict()


def test_tn_reproduces_mops(generic_system):
    n = MultiIndex(2, 2)
    b = mop_bundle(generic_system, n, True)
    out = apply_Tn(generic_system, n, PolyPair(b.Q1, b.Q2), b.cfg)
    assert coeff_distance(out.Qhat[0], b.Q1) < 1e-10
    assert coeff_distance(out.Qhat[1], b.Q2) < 1e-10
    assert tuple(float(k) for k in out.K) == pytest.approx(b.K_float, rel=1e-10)


def test_constant_c_values(constant_system):
    # kappa ratios are c^{-1/2}; c_n = (c1^{-2/3} c2^{-1/3}, c1^{-1/3} c2^{-2/3})
    c = c_constants(constant_system, (3, 3))
    assert c[0] == pytest.approx(2 ** (-2 / 3) * 5 ** (-1 / 3), rel=1e-10)
    assert c[1] == pytest.approx(2 ** (-1 / 3) * 5 ** (-2 / 3), rel=1e-10)


def test_invalid_class_inputs(plain_system):
    n = MultiIndex(1, 1)
    cfg = PrecisionConfig()
    b = mop_bundle(plain_system, n)
    arith = cfg.arith
    too_high = ChebPoly.from_roots([0.0, 0.1, 0.2], plain_system.delta1, arith)
    with pytest.raises(InvalidClass):
        PolyPair(too_high, b.Q2).check(plain_system, n)
    # P1 vanishing on Delta2
    bad = ChebPoly.from_roots([2.5], plain_system.delta1, arith)
    with pytest.raises(InvalidClass):
        PolyPair(bad, b.Q2).check(plain_system, n)


def test_ttilde_domain(plain_system):
    n = MultiIndex(1, 1)
    b = mop_bundle(plain_system, n)
    neg = PolyPair(b.Q1.scaled(-1.0), b.Q2)
    with pytest.raises(NotInSnPlus):
        apply_Ttilde(plain_system, n, neg, b)
    img = apply_Ttilde(plain_system, n, PolyPair(b.Q1, b.Q2), b)
    x = np.linspace(2.05, 2.95, 5)
    assert np.allclose(img.P1(x) / b.Q1(x), 1.0, rtol=1e-10)
