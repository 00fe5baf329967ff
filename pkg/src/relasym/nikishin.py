"""Nikishin systems of two measures and their multiple orthogonal polynomials.

For a pair (sigma1, sigma2) on disjoint intervals the type II multiple
orthogonal polynomial Q1 of index (n1, n2) is orthogonal to degrees < n1
against sigma1 and to degrees < n2 against sigma2-hat * sigma1.  A bundle
collects Q1, the polynomial Q2 whose zeros are those of Psi1 on Delta2, the
functions of the second kind, the H/h functions and the K, kappa, eps
normalizations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import logging

import numpy as np

from .contours import ellipse_contour
from .chebpoly import ChebPoly, cheb_vandermonde, monic_lead
from .errors import (
    EvalOnSupport,
    InvalidClass,
    NotConverged,
    OverlappingSupports,
    RootCountMismatch,
    SingularGram,
)
from .linalg import solve
from .precision import (
    LADDER_SWITCH_DEGREE,
    PrecisionConfig,
    extended_bits_for_degree,
)
from .quadrature import measure_rule
from .roots import roots_in_interval
from .weights import Interval, MeasureSpec, WeightExpr

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultiIndex:
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise InvalidClass("multi-index entries must be non-negative")
        if self.n2 > self.n1 + 1:
            raise InvalidClass(f"({self.n1},{self.n2}) is outside the class n2 <= n1 + 1")

    @property
    def N1(self) -> int:
        return self.n1 + self.n2

    @property
    def N2(self) -> int:
        return self.n2

    @property
    def size(self) -> int:
        return self.n1 + self.n2

    def __iter__(self):
        return iter((self.n1, self.n2))

    def __str__(self):
        return f"({self.n1},{self.n2})"


def as_index(n) -> MultiIndex:
    return n if isinstance(n, MultiIndex) else MultiIndex(*n)


# ---------------------------------------------------------------------------
# evaluation helpers


def _points(z, arith):
    """1-D array of evaluation points in working precision, and a scalar flag."""
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=object if arith.is_mp else None))
    if arith.is_mp:
        if any(isinstance(v, (complex, np.complexfloating)) or hasattr(v, "_mpc_") for v in zz):
            zz = arith.complex(zz)
        else:
            zz = arith.real(zz)
    return zz, scalar


def _out(vals, scalar):
    return vals[0] if scalar else vals


def cauchy_sum(nodes, values, z, arith):
    """sum_j values_j / (z_i - nodes_j) for a 1-D array z."""
    if arith.is_mp:
        D = z[:, None] - nodes[None, :]
        return (D ** -1) @ values
    return (1.0 / (z[:, None] - nodes[None, :])) @ values


def _check_off(z, interval: Interval, tol: float):
    for v in np.atleast_1d(z):
        if interval.distance(complex(v)) < tol:
            raise EvalOnSupport(f"point {complex(v)} lies on or too close to {interval}")


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class NikishinPair:
    sigma1: MeasureSpec
    sigma2: MeasureSpec
    rho1: WeightExpr | None = None
    rho2: WeightExpr | None = None

    def __post_init__(self):
        if self.sigma1.interval.intersects(self.sigma2.interval):
            raise OverlappingSupports(
                f"supports overlap: {self.sigma1.interval} and {self.sigma2.interval}"
            )

    @property
    def delta1(self) -> Interval:
        return self.sigma1.interval

    @property
    def delta2(self) -> Interval:
        return self.sigma2.interval

    @property
    def has_perturbation(self) -> bool:
        return self.rho1 is not None or self.rho2 is not None

    def measures(self, use_perturbation: bool = False):
        if not use_perturbation:
            return self.sigma1, self.sigma2
        return self.sigma1.perturbed(self.rho1), self.sigma2.perturbed(self.rho2)

    def s2_density(self, x, cfg: PrecisionConfig | None = None, use_perturbation=False):
        """sigma2-hat(x) * sigma1'(x) on Delta1."""
        cfg = cfg or PrecisionConfig()
        mu1, mu2 = self.measures(use_perturbation)
        xs, scalar = _points(x, cfg.arith)
        vals = cauchy_values(mu2, xs, cfg) * mu1.density(xs, cfg.arith)
        return _out(vals, scalar)

    def sign_of_s2(self) -> int:
        """Sign of sigma2-hat on Delta1 (negative when Delta2 lies to the right)."""
        return -1 if self.delta2.a > self.delta1.b else 1

    def validate(self):
        self.sigma1.validate()
        self.sigma2.validate()
        if self.rho1 is not None:
            self.rho1.validate(self.delta1)
        if self.rho2 is not None:
            self.rho2.validate(self.delta2)
        return self


def build_system(sigma1: MeasureSpec, sigma2: MeasureSpec, rho=None) -> NikishinPair:
    rho1, rho2 = rho if rho is not None else (None, None)
    return NikishinPair(sigma1, sigma2, rho1, rho2).validate()


def default_system(rho1: WeightExpr | None = None, rho2: WeightExpr | None = None) -> NikishinPair:
    """Lebesgue measures on [-1, 1] and [2, 3]."""
    return NikishinPair(MeasureSpec(Interval(-1.0, 1.0)), MeasureSpec(Interval(2.0, 3.0)), rho1, rho2)


def cauchy_values(mu: MeasureSpec, z, cfg: PrecisionConfig, values=None, order=None):
    """Vectorized int values(t) dmu(t) / (z - t) with a doubled-order check.

    ``values`` is an optional callable applied to the rule nodes.
    """
    arith = cfg.arith
    out = []
    base = order or cfg.quad_order
    for q in (base, 2 * base):
        rule = measure_rule(mu, q, cfg.mantissa_bits)
        w = rule.weights if values is None else rule.weights * values(rule.nodes)
        out.append(cauchy_sum(rule.nodes, w, z, arith))
    diff = np.max(np.abs(arith.to_complex(out[1] - out[0])))
    ref = np.max(np.abs(arith.to_complex(out[1])))
    if ref > 0 and diff > 10 * cfg.residual_tol * ref:
        raise NotConverged(f"Cauchy transform quadrature not resolved ({diff / ref:.3g})")
    return out[1]


def cauchy_transform(mu: MeasureSpec, z, cfg: PrecisionConfig | None = None):
    """int dmu(t) / (z - t) for z off the hull of mu."""
    cfg = cfg or PrecisionConfig()
    zz, scalar = _points(z, cfg.arith)
    _check_off(zz, mu.interval, cfg.root_tol)
    return _out(cauchy_values(mu, zz, cfg), scalar)


# ---------------------------------------------------------------------------
# multiple orthogonal polynomial


@dataclass(frozen=True, eq=False)
class MopSolution:
    Q: ChebPoly
    residuals: tuple
    cfg: PrecisionConfig


@lru_cache(maxsize=64)
def _s2_weights(mu1: MeasureSpec, mu2: MeasureSpec, order: int, cfg: PrecisionConfig):
    """Rule for mu1 together with the s2 weights sigma2-hat(x_i) * w_i."""
    rule = measure_rule(mu1, order, cfg.mantissa_bits)
    return rule, rule.weights * cauchy_values(mu2, rule.nodes, cfg)


def _mop_rows(mu1, mu2, n: MultiIndex, cfg, order):
    """Chebyshev test rows (weights times T_nu) for s1 and s2 on a given rule."""
    rule, w2 = _s2_weights(mu1, mu2, order, cfg)
    u = mu1.interval.to_unit(rule.nodes, cfg.arith)
    V = cheb_vandermonde(u, n.N1, cfg.arith)
    return V, rule.weights, w2


def _solve_mop(mu1, mu2, n: MultiIndex, cfg: PrecisionConfig) -> MopSolution:
    arith = cfg.arith
    N = n.N1
    iv = mu1.interval
    lead = monic_lead(N, iv, arith)
    if N == 0:
        return MopSolution(ChebPoly.one(iv, arith), (0.0, 0.0), cfg)
    V, w1, w2 = _mop_rows(mu1, mu2, n, cfg, cfg.quad_order)
    rows = np.concatenate([(V[:, : n.n1] * w1[:, None]).T, (V[:, : n.n2] * w2[:, None]).T], axis=0)
    A = rows @ V[:, :N]
    b = -(rows @ V[:, N]) * lead
    x = solve(A, b)
    c = np.concatenate([x, np.array([lead], dtype=x.dtype)])
    Q = ChebPoly(iv, c, arith, monic=True)
    # residuals on the doubled rule, relative to the L1 size of the integrand
    V2, v1, v2 = _mop_rows(mu1, mu2, n, cfg, 2 * cfg.quad_order)
    q = V2 @ c
    res = []
    for w, cnt in ((v1, n.n1), (v2, n.n2)):
        if cnt == 0:
            res.append(0.0)
            continue
        r = (V2[:, :cnt] * (w * q)[:, None]).sum(axis=0)
        scale = float(np.abs(w * q).sum())
        res.append(float(np.max(np.abs(arith.to_float(r)))) / scale)
    return MopSolution(Q, tuple(res), cfg)


def mop_Q(sys: NikishinPair, n, use_perturbation: bool = False, cfg: PrecisionConfig | None = None) -> ChebPoly:
    """Monic type II multiple orthogonal polynomial of degree n1 + n2."""
    n = as_index(n)
    cfg = cfg or PrecisionConfig.for_degree(n.N1)
    cfg.check_degree(n.N1)
    mu1, mu2 = sys.measures(use_perturbation)
    sol = _solve_mop(mu1, mu2, n, cfg)
    if max(sol.residuals) > cfg.residual_tol:
        raise NotConverged(f"multiple orthogonality residuals {sol.residuals} exceed {cfg.residual_tol:.1g}")
    if n.N1:
        roots_in_interval(sol.Q, mu1.interval, n.N1, cfg)
    return sol.Q


def second_kind(sys: NikishinPair, Q: ChebPoly, k: int, z, cfg: PrecisionConfig | None = None,
                use_perturbation: bool = False):
    """Psi_1(z) = int Q/(z-x) dsigma1,  Psi_2(z) = int Psi_1(t)/(z-t) dsigma2 (direct forms)."""
    cfg = cfg or PrecisionConfig.for_degree(Q.degree)
    arith = cfg.arith
    mu1, mu2 = sys.measures(use_perturbation)
    Q = Q.with_arith(arith)
    zz, scalar = _points(z, arith)
    if k == 1:
        _check_off(zz, mu1.interval, cfg.root_tol)
        return _out(cauchy_values(mu1, zz, cfg, values=Q), scalar)
    if k == 2:
        _check_off(zz, mu2.interval, cfg.root_tol)
        psi1 = lambda t: cauchy_values(mu1, t, cfg, values=Q)
        return _out(cauchy_values(mu2, zz, cfg, values=psi1), scalar)
    raise ValueError("k must be 1 or 2")


# ---------------------------------------------------------------------------
# bundle


@dataclass(frozen=True, eq=False)
class _Discrete:
    """Rule on one interval with the polynomial values the bundle needs."""

    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class MopBundle:
    """All normalization objects for one system and multi-index.

    Evaluators accept a scalar or an array of points.  ``H(k, z)`` uses the
    integral recursion (stable everywhere off Delta_{k-1}); ``H_quotient``
    uses the quotient of polynomials and direct second-kind functions.
    """

    system: NikishinPair
    index: MultiIndex
    perturbed: bool
    cfg: PrecisionConfig
    Q1: ChebPoly
    Q2: ChebPoly
    K: tuple
    eps: tuple
    residuals: tuple
    d1: _Discrete = field(repr=False)
    d2: _Discrete = field(repr=False)
    checks: dict = field(default_factory=dict)

    @property
    def arith(self):
        return self.cfg.arith

    @property
    def measures(self):
        return self.system.measures(self.perturbed)

    @property
    def kappa(self):
        return (self.K[0], self.K[1] / self.K[0])

    @property
    def K_float(self):
        return tuple(float(v) for v in self.K)

    @property
    def kappa_float(self):
        return tuple(float(v) for v in self.kappa)

    # values on the rule nodes ------------------------------------------------
    @cached_property
    def _w_h2(self):
        # weights of H2's integral: Q1^2 / Q2 dsigma1
        x = self.d1.nodes
        return self.d1.weights * self.Q1(x) ** 2 / self.Q2(x)

    @cached_property
    def _H2_on_d2(self):
        return cauchy_sum(self.d1.nodes, self._w_h2, self.d2.nodes, self.arith)

    @cached_property
    def _w_h3(self):
        x = self.d2.nodes
        return self.d2.weights * self.Q2(x) ** 2 * self._H2_on_d2 / self.Q1(x)

    # evaluators -----------------------------------------------------------------
    def H(self, k: int, z):
        """Integral form of the H-functions (H1 = 1)."""
        arith = self.arith
        zz, scalar = _points(z, arith)
        if k == 1:
            return _out(arith.ones(len(zz)) if arith.is_mp else np.ones(len(zz)), scalar)
        if k == 2:
            _check_off(zz, self.system.delta1, self.cfg.root_tol)
            return _out(cauchy_sum(self.d1.nodes, self._w_h2, zz, arith), scalar)
        if k == 3:
            _check_off(zz, self.system.delta2, self.cfg.root_tol)
            return _out(cauchy_sum(self.d2.nodes, self._w_h3, zz, arith), scalar)
        raise ValueError("k must be 1, 2 or 3")

    def h(self, k: int, z):
        Kprev = (1, self.K[0], self.K[1])[k - 1]
        return self.H(k, z) * Kprev**2

    def psi1_direct(self, z):
        zz, scalar = _points(z, self.arith)
        _check_off(zz, self.system.delta1, self.cfg.root_tol)
        w = self.d1.weights * self.Q1(self.d1.nodes)
        return _out(cauchy_sum(self.d1.nodes, w, zz, self.arith), scalar)

    def psi2_direct(self, z):
        zz, scalar = _points(z, self.arith)
        _check_off(zz, self.system.delta2, self.cfg.root_tol)
        w = self.d2.weights * self.psi1_direct(self.d2.nodes)
        return _out(cauchy_sum(self.d2.nodes, w, zz, self.arith), scalar)

    def psi(self, k: int, z):
        """Second-kind functions through the stable identities Psi1 = H2 Q2/Q1, Psi2 = H3/Q2."""
        zz, scalar = _points(z, self.arith)
        if k == 1:
            return _out(self.H(2, zz) * self.Q2(zz) / self.Q1(zz), scalar)
        if k == 2:
            return _out(self.H(3, zz) / self.Q2(zz), scalar)
        raise ValueError("k must be 1 or 2")

    def H_quotient(self, k: int, z):
        """H_k from its defining quotient Q_{k-1} Psi_{k-1} / Q_k."""
        zz, scalar = _points(z, self.arith)
        if k == 2:
            return _out(self.Q1(zz) * self.psi1_direct(zz) / self.Q2(zz), scalar)
        if k == 3:
            return _out(self.Q2(zz) * self.psi2_direct(zz), scalar)
        raise ValueError("k must be 2 or 3")

    def q(self, k: int, z):
        """Orthonormal q_k = kappa_k Q_k."""
        P = self.Q1 if k == 1 else self.Q2
        return P(z) * self.kappa[k - 1]

    def varying_weight(self, k: int):
        """Evaluator of H_k / (Q_{k-1} Q_{k+1}) on Delta_k (the extra factor)."""
        if k == 1:
            return lambda x: 1 / self.Q2(x)
        return lambda x: self.H(2, x) / self.Q1(x)

    def summary(self) -> dict:
        return {
            "n1": self.index.n1,
            "n2": self.index.n2,
            "perturbed": self.perturbed,
            "mantissa_bits": self.cfg.mantissa_bits,
            "K1": float(self.K[0]),
            "K2": float(self.K[1]),
            "kappa1": float(self.kappa[0]),
            "kappa2": float(self.kappa[1]),
            "eps1": self.eps[0],
            "eps2": self.eps[1],
            "residual_s1": self.residuals[0],
            "residual_s2": self.residuals[1],
            **{k: v for k, v in self.checks.items()},
        }


def _constant_sign(vals, arith, what):
    s = np.sign(arith.to_float(vals))
    if not (np.all(s > 0) or np.all(s < 0)):
        raise NotConverged(f"{what} changes sign on its interval")
    return int(s[0])


def check_points(sys: NikishinPair, count: int = 20) -> np.ndarray:
    """Deterministic points on an ellipse around Delta1 at distance 0.5 (off both intervals)."""
    return ellipse_contour(sys.delta1, count, offset=0.5, phase=0.1234)


def _build_bundle(sys: NikishinPair, n: MultiIndex, use_perturbation: bool, cfg: PrecisionConfig,
                  check: bool) -> MopBundle:
    arith = cfg.arith
    mu1, mu2 = sys.measures(use_perturbation)
    sol = _solve_mop(mu1, mu2, n, cfg)
    if max(sol.residuals) > cfg.residual_tol:
        raise NotConverged(f"multiple orthogonality residuals {sol.residuals}")
    Q1 = sol.Q
    if n.N1:
        roots_in_interval(Q1, mu1.interval, n.N1, cfg)
    r1 = measure_rule(mu1, cfg.quad_order, cfg.mantissa_bits)
    r2 = measure_rule(mu2, cfg.quad_order, cfg.mantissa_bits)
    d1 = _Discrete(r1.nodes, r1.weights)
    d2 = _Discrete(r2.nodes, r2.weights)
    # Q2 from the zeros of Psi1 on Delta2
    w_psi = d1.weights * Q1(d1.nodes)
    psi1 = lambda t: cauchy_sum(d1.nodes, w_psi, t, arith)
    if n.N2:
        zeros = roots_in_interval(psi1, mu2.interval, n.N2, cfg)
        Q2 = ChebPoly.from_roots(zeros, mu2.interval, arith)
    else:
        Q2 = ChebPoly.one(mu2.interval, arith)
    proto = MopBundle(sys, n, use_perturbation, cfg, Q1, Q2, (None, None), (0, 0), sol.residuals, d1, d2)
    # normalizations
    I1 = proto._w_h2.sum()
    I2 = proto._w_h3.sum()
    K1 = abs(I1) ** -0.5 if not arith.is_mp else arith.ctx.power(abs(I1), -0.5)
    K2 = abs(I2) ** -0.5 if not arith.is_mp else arith.ctx.power(abs(I2), -0.5)
    eps1 = _constant_sign(Q2(d1.nodes), arith, "Q2 on Delta1")
    eps2 = _constant_sign(proto._H2_on_d2 / Q1(d2.nodes), arith, "H2/Q1 on Delta2")
    bundle = MopBundle(sys, n, use_perturbation, cfg, Q1, Q2, (K1, K2), (eps1, eps2), sol.residuals, d1, d2)
    if check:
        bundle.checks.update(consistency_checks(bundle))
    return bundle


def assemble_bundle(sys: NikishinPair, n, perturbed: bool, cfg: PrecisionConfig, Q1: ChebPoly, Q2: ChebPoly,
                    K, eps, residuals, checks=None) -> MopBundle:
    """Rebuild a bundle from stored parts (quadrature rules are recomputed deterministically)."""
    n = as_index(n)
    mu1, mu2 = sys.measures(perturbed)
    r1 = measure_rule(mu1, cfg.quad_order, cfg.mantissa_bits)
    r2 = measure_rule(mu2, cfg.quad_order, cfg.mantissa_bits)
    return MopBundle(sys, n, perturbed, cfg, Q1, Q2, tuple(K), tuple(eps), tuple(residuals),
                     _Discrete(r1.nodes, r1.weights), _Discrete(r2.nodes, r2.weights), dict(checks or {}))


def consistency_checks(b: MopBundle) -> dict:
    """Quotient-versus-integral agreement of H2 and H3 at 20 contour points."""
    z = check_points(b.system)
    out = {}
    for k in (2, 3):
        a = b.arith.to_complex(b.H(k, z))
        q = b.arith.to_complex(b.H_quotient(k, z))
        out[f"H{k}_quotient_dev"] = float(np.max(np.abs(a - q) / np.abs(a)))
    return out


HNK_TOL = 1e-8
# float64 bundles must reproduce themselves this well or escalate
UNIQ_TOL = 1e-11


def mop_bundle(sys: NikishinPair, n, use_perturbation: bool = False, cfg: PrecisionConfig | None = None,
               escalate: bool = True, check: bool = True) -> MopBundle:
    """Compute the bundle, escalating to extended precision when a check fails."""
    n = as_index(n)
    cfg = cfg or PrecisionConfig.for_degree(n.N1)
    cfg.check_degree(n.N1)
    try:
        b = _build_bundle(sys, n, use_perturbation, cfg, check)
        if check and max(b.checks.values()) > HNK_TOL:
            raise NotConverged(f"H quotient/integral deviation {max(b.checks.values()):.3g}")
        if check and escalate and not cfg.extended:
            # float64 Q2 comes from zeros of a cancelling integral; certify it
            dev = max(uniqueness_deviation(b))
            b.checks["uniqueness_dev"] = dev
            if dev > UNIQ_TOL:
                raise NotConverged(f"Q1/Q2 reproduce their own orthogonality only to {dev:.3g}")
        return b
    except (SingularGram, NotConverged, RootCountMismatch) as err:
        if not escalate or cfg.extended:
            raise
        bits = extended_bits_for_degree(n.N1)
        log.info("escalating %s to %d bits after: %s", n, bits, err)
        return mop_bundle(sys, n, use_perturbation, cfg.with_bits(bits), escalate=False, check=check)


def uniqueness_deviation(b: MopBundle) -> tuple:
    """Re-derive Q1, Q2 as ordinary orthogonal polynomials of the bundle's own
    varying measures and return the normalized coefficient deviations."""
    from .orthopoly import VaryingMeasure, monic_orthogonal

    mu1, mu2 = b.measures
    out = []
    for k, (mu, P) in enumerate(((mu1, b.Q1), (mu2, b.Q2)), start=1):
        r = monic_orthogonal(VaryingMeasure(mu, b.varying_weight(k)), P.degree, b.cfg, check_zeros=False)
        out.append(coeff_distance(r.monic, P))
    return tuple(out)


def coeff_distance(P: ChebPoly, R: ChebPoly) -> float:
    """max |p_j/p_N - r_j/r_N| / max |r_j/r_N| in the Chebyshev basis."""
    if P.degree != R.degree:
        return float("inf")
    p = P.arith.to_float(P.coeffs / P.coeffs[-1])
    r = R.arith.to_float(R.coeffs / R.coeffs[-1])
    return float(np.max(np.abs(p - r)) / np.max(np.abs(r)))
