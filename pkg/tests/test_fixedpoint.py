import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relasym.cli.config import parse_weight
from relasym.errors import GridMismatch, MaxIterations, NonPositiveSample
from relasym.fixedpoint import (
    GridFnPair,
    apply_T,
    constant_phi,
    metric_d,
    random_pair,
    solve_phi,
    sup_norm_delta,
)
from relasym.weights import Interval

D1, D2 = Interval(-1, 1), Interval(2, 3)
RHO1 = parse_weight("rational(2 + x)")
RHO2 = parse_weight("exp(0.5*x)")


def test_constant_closed_form():
    # T maps constants to constants: u -> (c1/v)^{-1/2}, v -> (c2/u)^{-1/2}
    c1, c2 = 2.0, 5.0
    res = solve_phi(parse_weight("const(2)"), parse_weight("const(5)"), D1, D2, tol=1e-12)
    p1, p2 = constant_phi(c1, c2)
    assert np.allclose(res.phi.f1, p1, rtol=1e-11) and np.allclose(res.phi.f2, p2, rtol=1e-11)
    assert res.at_infinity(1) == pytest.approx(p1, rel=1e-11)
    assert p1 == pytest.approx((c1 / p2) ** -0.5) and p2 == pytest.approx((c2 / p1) ** -0.5)


def test_contraction_on_random_pairs(rng):
    worst = 0.0
    for _ in range(20):
        f = random_pair(D1, D2, rng, amplitude=1.5)
        g = random_pair(D1, D2, rng, amplitude=1.5)
        worst = max(worst, metric_d(apply_T(RHO1, RHO2, f), apply_T(RHO1, RHO2, g)) / metric_d(f, g))
    assert worst <= 0.5 + 1e-6


def test_solve_residual_and_history():
    res = solve_phi(RHO1, RHO2, D1, D2, tol=1e-10)
    assert res.residual <= 2e-10
    assert res.certified_d_error <= 5e-11
    steps = np.array(res.history)
    assert np.all(steps[1:] <= 0.5 * steps[:-1] * (1 + 1e-6) + 1e-15)


def test_resolution_independence():
    a = solve_phi(RHO1, RHO2, D1, D2, tol=1e-12, M=64)
    b = solve_phi(RHO1, RHO2, D1, D2, tol=1e-12, M=128)
    assert a.at_infinity(1) == pytest.approx(b.at_infinity(1), rel=1e-12)
    z = np.array([0.0 + 1j, 4.0, 1.5])
    assert np.allclose(a(1, z), b(1, z), rtol=1e-12)


def test_grid_errors():
    f = GridFnPair.constant(D1, D2, 1.0, 1.0, 32)
    g = GridFnPair.constant(D1, D2, 1.0, 1.0, 64)
    with pytest.raises(GridMismatch):
        metric_d(f, g)
    with pytest.raises(NonPositiveSample):
        GridFnPair(D1, D2, np.array([1.0, -1.0]), np.array([1.0, 1.0]))
    with pytest.raises(MaxIterations):
        solve_phi(RHO1, RHO2, D1, D2, tol=1e-14, max_iter=3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metric_properties(seed):
    rng = np.random.default_rng(seed)
    f, g, h = (random_pair(D1, D2, rng, M=16) for _ in range(3))
    assert metric_d(f, f) == 0.0
    assert metric_d(f, g) == pytest.approx(metric_d(g, f))
    assert metric_d(f, h) <= metric_d(f, g) + metric_d(g, h) + 1e-12
    assert sup_norm_delta(f, g) >= 0
