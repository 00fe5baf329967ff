"""The polynomial maps T_n and T~_n and checks of their fixed points.

T_n sends a pair (P1, P2) to the monic orthogonal polynomials of the
varying measures rho1 dsigma1 / P2 and H2 rho2 dsigma2 / P1, computed one
after the other.  T~_n acts on ratios P_k / Q_k with the unperturbed
polynomials Q_k as fixed denominators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .chebpoly import ChebPoly
from .errors import InvalidClass, NotInSnPlus
from .nikishin import (
    MopBundle,
    MultiIndex,
    NikishinPair,
    _check_off,
    _out,
    _points,
    as_index,
    cauchy_sum,
    coeff_distance,
    mop_bundle,
)
from .orthopoly import VaryingMeasure, monic_orthogonal
from .precision import PrecisionConfig
from .quadrature import measure_rule
from .weights import Interval


def _sample_count(P: ChebPoly) -> int:
    return 4 * P.degree + 64


def _float_values(P: ChebPoly, iv: Interval, count: int):
    x = iv.chebyshev_points(count)
    return P.arith.to_float(P(P.arith.real(x)))


@dataclass(frozen=True, eq=False)
class PolyPair:
    """P1 of degree <= N1 without zeros on Delta2, P2 of degree <= N2 without zeros on Delta1."""

    P1: ChebPoly
    P2: ChebPoly

    def check(self, sys: NikishinPair, n: MultiIndex) -> "PolyPair":
        if self.P1.degree > n.N1 or self.P2.degree > n.N2:
            raise InvalidClass(f"degrees ({self.P1.degree},{self.P2.degree}) exceed ({n.N1},{n.N2})")
        for P, iv, name in ((self.P1, sys.delta2, "P1 on Delta2"), (self.P2, sys.delta1, "P2 on Delta1")):
            v = _float_values(P, iv, _sample_count(P))
            if not (np.all(v > 0) or np.all(v < 0)):
                raise InvalidClass(f"{name} changes sign or vanishes")
        return self

    def with_arith(self, arith) -> "PolyPair":
        return PolyPair(self.P1.with_arith(arith), self.P2.with_arith(arith))


@dataclass(frozen=True, eq=False)
class TnOutput:
    Qhat: Tuple[ChebPoly, ChebPoly]
    K: tuple
    signs: tuple
    residuals: tuple
    H2: Callable = field(repr=False)
    H3: Callable = field(repr=False)
    cfg: PrecisionConfig = field(repr=False, default=None)

    @property
    def kappa(self):
        return (self.K[0], self.K[1] / self.K[0])

    def h(self, k: int, z):
        Kprev = (1, self.K[0], self.K[1])[k - 1]
        H = {2: self.H2, 3: self.H3}[k]
        return H(z) * Kprev**2


def _cauchy_evaluator(nodes, weights, interval: Interval, cfg: PrecisionConfig):
    arith = cfg.arith

    def ev(z):
        zz, scalar = _points(z, arith)
        _check_off(zz, interval, cfg.root_tol)
        return _out(cauchy_sum(nodes, weights, zz, arith), scalar)

    return ev


def _abs_pow(v, p, arith):
    return abs(v) ** p if not arith.is_mp else arith.ctx.power(abs(v), p)


def apply_Tn(sys: NikishinPair, n, Qt: PolyPair, cfg: PrecisionConfig | None = None,
             use_perturbation: bool = True) -> TnOutput:
    """One application of T_n for the (perturbed) system."""
    n = as_index(n)
    cfg = cfg or PrecisionConfig.for_degree(n.N1)
    cfg.check_degree(n.N1)
    arith = cfg.arith
    Qt = Qt.check(sys, n).with_arith(arith)
    mu1, mu2 = sys.measures(use_perturbation)
    P1, P2 = Qt.P1, Qt.P2

    # first component: rho1 dsigma1 / P2
    r1 = monic_orthogonal(VaryingMeasure(mu1, lambda x: 1 / P2(x)), n.N1, cfg)
    R1 = measure_rule(mu1, cfg.quad_order, cfg.mantissa_bits)
    w1 = R1.weights / P2(R1.nodes)
    w_h2 = w1 * r1.monic(R1.nodes) ** 2
    H2 = _cauchy_evaluator(R1.nodes, w_h2, sys.delta1, cfg)

    # second component: H2 rho2 dsigma2 / P1
    R2 = measure_rule(mu2, cfg.quad_order, cfg.mantissa_bits)
    H2_on_2 = cauchy_sum(R1.nodes, w_h2, R2.nodes, arith)

    def extra2(x):
        return cauchy_sum(R1.nodes, w_h2, np.atleast_1d(x), arith) / P1(x)

    r2 = monic_orthogonal(VaryingMeasure(mu2, extra2), n.N2, cfg)
    w_h3 = R2.weights * H2_on_2 / P1(R2.nodes) * r2.monic(R2.nodes) ** 2
    H3 = _cauchy_evaluator(R2.nodes, w_h3, sys.delta2, cfg)

    K1 = _abs_pow(w_h2.sum(), -0.5, arith)
    K2 = _abs_pow(w_h3.sum(), -0.5, arith)
    return TnOutput((r1.monic, r2.monic), (K1, K2), (r1.sign, r2.sign), (r1.residual, r2.residual), H2, H3, cfg)


def _positive_ratio(P: ChebPoly, Q: ChebPoly, iv: Interval, what: str):
    count = 4 * max(P.degree, Q.degree) + 64
    v = _float_values(P, iv, count) / _float_values(Q, iv, count)
    if not np.all(v > 0):
        raise NotInSnPlus(f"{what} is not positive on {iv}")


def apply_Ttilde(sys: NikishinPair, n, P: PolyPair, base: MopBundle,
                 cfg: PrecisionConfig | None = None) -> PolyPair:
    """T~_n on (P1/Q1, P2/Q2); returns the numerator pair of the image.

    ``base`` is the unperturbed bundle supplying Q_k and kappa_{n,k}.
    """
    n = as_index(n)
    Q1, Q2 = base.Q1, base.Q2
    _positive_ratio(P.P1, Q1, sys.delta2, "P1/Q1")
    _positive_ratio(P.P2, Q2, sys.delta1, "P2/Q2")
    out = apply_Tn(sys, n, P, cfg)
    arith = out.cfg.arith
    k1, k2 = out.kappa
    b1, b2 = (arith.real(v) for v in base.kappa)
    res = PolyPair(out.Qhat[0].scaled(k1 / b1), out.Qhat[1].scaled(k2 / b2))
    _positive_ratio(res.P1, Q1, sys.delta2, "image P1/Q1")
    _positive_ratio(res.P2, Q2, sys.delta1, "image P2/Q2")
    return res


def c_from_kappa_ratios(r1: float, r2: float):
    return r1 ** (4 / 3) * r2 ** (2 / 3), r1 ** (2 / 3) * r2 ** (4 / 3)


def kappa_ratios(pert: MopBundle, base: MopBundle):
    k = pert.kappa_float
    b = base.kappa_float
    return k[0] / b[0], k[1] / b[1]


def c_constants(sys: NikishinPair, n, cfg: PrecisionConfig | None = None):
    """(c_{n,1}, c_{n,2}) from the kappa ratios of the perturbed and plain bundles."""
    n = as_index(n)
    pert = mop_bundle(sys, n, True, cfg)
    base = mop_bundle(sys, n, False, cfg)
    return c_from_kappa_ratios(*kappa_ratios(pert, base))


def ratio_sup_deviation(A: PolyPair, B: PolyPair, base: MopBundle, sys: NikishinPair, count: int = 256):
    """max_k sup |A_k/Q_k - B_k/Q_k| / sup |B_k/Q_k| on Delta2 (k=1) and Delta1 (k=2)."""
    out = []
    for PA, PB, Q, iv in ((A.P1, B.P1, base.Q1, sys.delta2), (A.P2, B.P2, base.Q2, sys.delta1)):
        q = _float_values(Q, iv, count)
        a = _float_values(PA, iv, count) / q
        b = _float_values(PB, iv, count) / q
        out.append(float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    return max(out)


@dataclass
class FixedPointReport:
    n: MultiIndex
    tn_residual: float
    ttilde_residual: float
    c: tuple
    signs_match: bool
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return self.tn_residual <= self.tol and self.ttilde_residual <= self.tol and self.signs_match

    def as_dict(self):
        return {
            "n1": self.n.n1,
            "n2": self.n.n2,
            "tn_residual": self.tn_residual,
            "ttilde_residual": self.ttilde_residual,
            "c1": self.c[0],
            "c2": self.c[1],
            "signs_match": self.signs_match,
            "passed": self.passed,
        }


def verify_fixed_point(sys: NikishinPair, n, cfg: PrecisionConfig | None = None, tol: float = 1e-8,
                       bundles=None) -> FixedPointReport:
    """Residuals of T_n at the perturbed MOPs and of T~_n at its stated fixed point."""
    n = as_index(n)
    pert, base = bundles if bundles is not None else (mop_bundle(sys, n, True), mop_bundle(sys, n, False))
    cfg = cfg or PrecisionConfig.for_degree(n.N1)
    Qt = PolyPair(pert.Q1, pert.Q2)
    out = apply_Tn(sys, n, Qt, cfg)
    tn_res = max(coeff_distance(out.Qhat[0], Qt.P1.with_arith(cfg.arith)),
                 coeff_distance(out.Qhat[1], Qt.P2.with_arith(cfg.arith)))
    c1, c2 = c_from_kappa_ratios(*kappa_ratios(pert, base))
    arith = cfg.arith
    g = PolyPair(pert.Q1.with_arith(arith).scaled(arith.real(c1)), pert.Q2.with_arith(arith).scaled(arith.real(c2)))
    Tg = apply_Ttilde(sys, n, g, base, cfg)
    tt_res = ratio_sup_deviation(Tg, g, base, sys)
    signs_match = tuple(out.signs) == tuple(base.eps) == tuple(pert.eps)
    return FixedPointReport(n, tn_res, tt_res, (c1, c2), signs_match, tol)


def iterate_Ttilde(sys: NikishinPair, n, steps: int, base: MopBundle, cfg: PrecisionConfig | None = None):
    """Iterates of T~_n from (1, 1), i.e. P_k = Q_k; yields the numerator pairs."""
    P = PolyPair(base.Q1, base.Q2)
    for _ in range(steps):
        P = apply_Ttilde(sys, n, P, base, cfg)
        yield P
