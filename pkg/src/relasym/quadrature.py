"""Gauss rules, measure quadrature and the equilibrium log-integral."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .branches import exterior_map
from .errors import NonFinite, NotConverged
from .precision import Arith, PrecisionConfig, arith_for_bits
from .weights import Interval, MeasureSpec, WeightExpr, is_real_root, poly_eval


def _jacobi_p_and_prev(n, alpha, beta, x):
    """P_n^{(alpha,beta)}(x) and P_{n-1} by the three-term recurrence (any dtype)."""
    p0 = 1 + 0 * x
    if n == 0:
        return p0, 0 * x
    p1 = (x - 1) * ((alpha + beta + 2) / 2) + (alpha + 1)
    for k in range(2, n + 1):
        c = 2 * k + alpha + beta
        a1 = 2 * k * (k + alpha + beta) * (c - 2)
        a2 = (c - 1) * (alpha * alpha - beta * beta)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (k + alpha - 1) * (k + beta - 1) * c
        p0, p1 = p1, ((x * a3 + a2) * p1 - p0 * a4) / a1
    return p1, p0


def _float_rule(n, alpha, beta):
    if alpha == 0.0 and beta == 0.0:
        return np.polynomial.legendre.leggauss(n)
    x, w = roots_jacobi(n, alpha, beta)
    return np.asarray(x), np.asarray(w)


@lru_cache(maxsize=128)
def gauss_jacobi(n: int, alpha: float, beta: float, bits: int = 53):
    """Gauss-Jacobi rule for (1-t)^alpha (1+t)^beta on [-1, 1].

    In float64 this defers to scipy/numpy.  At extended precision the float
    nodes are Newton-polished on the three-term recurrence (quadratic
    convergence, so two or three steps) and the weights come from the
    closed-form Christoffel numbers.
    """
    if n < 1:
        raise ValueError("rule size must be >= 1")
    arith = arith_for_bits(bits)
    if not arith.is_mp:
        return _float_rule(n, alpha, beta)
    ctx = arith.ctx
    a, b = ctx.mpf(alpha), ctx.mpf(beta)
    x = arith.real(_float_rule(n, alpha, beta)[0])
    c = 2 * n + a + b

    def newton_parts(x):
        pn, pm = _jacobi_p_and_prev(n, a, b, x)
        dp = (pn * (n * (a - b)) - pn * x * (n * c) + pm * (2 * (n + a) * (n + b))) / ((1 - x * x) * c)
        return pn, dp

    # quadratic convergence: once (n*step)^2 is below tol the update is final
    tol = 2.0 ** (-bits + 8)
    for _ in range(8):
        pn, dp = newton_parts(x)
        step = pn / dp
        x = x - step
        if (n * max(abs(float(s)) for s in step)) ** 2 < tol:
            break
    _, dp = newton_parts(x)
    const = ctx.exp(
        (a + b + 1) * ctx.ln2
        + ctx.loggamma(n + a + 1)
        + ctx.loggamma(n + b + 1)
        - ctx.loggamma(n + a + b + 1)
        - ctx.loggamma(n + 1)
    )
    w = ((1 - x * x) * dp * dp) ** -1 * const
    return x, w


def gauss_legendre_rule(n: int, bits: int = 53):
    """Gauss-Legendre nodes (increasing) and weights on [-1, 1]."""
    return gauss_jacobi(n, 0.0, 0.0, bits)


@dataclass(frozen=True, eq=False)
class MeasureRule:
    """Discrete rule with sum(w * f(x)) ~ integral of f against a measure."""

    measure: MeasureSpec
    nodes: np.ndarray
    weights: np.ndarray
    arith: Arith
    order: int

    def integrate_values(self, values):
        return (self.weights * values).sum()

    @property
    def mass(self):
        return self.weights.sum()


@lru_cache(maxsize=256)
def measure_rule(measure: MeasureSpec, order: int, bits: int = 53) -> MeasureRule:
    """Composite Gauss-Jacobi rule for a structured measure.

    The host interval is split at interior real zeros of the weight; each piece
    gets a Jacobi rule carrying the summed edge exponents at its endpoints, and
    the remaining smooth part of the density multiplies the weights.
    """
    arith = arith_for_bits(bits)
    iv = measure.interval
    pts = measure.weight.edge_exponents(iv, bits)
    nodes, weights = [], []
    for (l, el), (r, er) in zip(pts[:-1], pts[1:]):
        t, wt = gauss_jacobi(order, float(er), float(el), bits)
        lo, hi = arith.real(l), arith.real(r)
        half = (hi - lo) / 2
        mid = (hi + lo) / 2
        x = mid + half * t
        if arith.is_mp:
            scale = arith.ctx.power(half, arith.ctx.mpf(er) + arith.ctx.mpf(el) + 1)
        else:
            scale = half ** (er + el + 1)
        smooth = measure.weight.evaluate(x, iv, arith, skip=(l, r))
        nodes.append(x)
        weights.append(wt * scale * smooth)
    x = np.concatenate(nodes)
    w = np.concatenate(weights)
    return MeasureRule(measure, x, w, arith, order)


def integrate(f, mu: MeasureSpec, cfg: PrecisionConfig | None = None):
    """Integral of ``f`` against ``mu``, checked against the doubled-order rule.

    ``f`` is called with an array of nodes of the configured precision.
    """
    cfg = cfg or PrecisionConfig()
    arith = cfg.arith
    vals = []
    scale = None
    for order in (cfg.quad_order, 2 * cfg.quad_order):
        rule = measure_rule(mu, order, cfg.mantissa_bits)
        fx = f(rule.nodes)
        fx = fx * arith.ones(len(rule.nodes)) if np.ndim(fx) == 0 else fx
        if not np.all(np.isfinite(arith.to_complex(fx))):
            raise NonFinite("integrand is not finite at a quadrature node")
        vals.append(rule.integrate_values(fx))
        scale = (abs(rule.weights) * abs(fx)).sum()
    diff = abs(vals[1] - vals[0])
    ref = max(abs(vals[1]), scale)
    if ref > 0 and float(diff / ref) > 10 * cfg.residual_tol:
        raise NotConverged(
            f"doubling the quadrature order changed the integral by {float(diff / ref):.3g} (relative)"
        )
    return vals[1]


def log_equilibrium_integral(w: WeightExpr, interval: Interval, cfg: PrecisionConfig | None = None) -> float:
    """Integral of log w against dx / sqrt((b-x)(x-a)) over the interval.

    ``log|x - r|`` contributions are integrated in closed form,
    ``pi * (log(half) + log|phi(u_r)| - log 2)``; the exp-polynomial part goes
    through the midpoint rule in the angle variable, which is exact for
    polynomials once the node count exceeds half the degree.
    """
    cfg = cfg or PrecisionConfig()
    scales, terms, q = w.log_decomposition(interval, 53)
    total = 0.0
    for c in scales:
        total += np.pi * np.log(abs(c)) * (1 if c > 0 else -1)
    for t in terms:
        r = complex(t.root) if not is_real_root(t.root) else float(t.root)
        u = interval.to_unit(r)
        phi = exterior_map(np.complex128(u))
        total += t.exponent * np.pi * (np.log(interval.half) + np.log(abs(phi)) - np.log(2.0))
    if len(q) > 1 or q[0] != 0.0:
        vals = []
        for m in (2 * len(q) + 8, 4 * len(q) + 16):
            theta = (np.arange(m) + 0.5) * np.pi / m
            vals.append(np.pi / m * np.sum(poly_eval(q, interval.from_unit(np.cos(theta)))))
        if abs(vals[1] - vals[0]) > 10 * cfg.residual_tol * max(1.0, abs(vals[1])):
            raise NotConverged("exp-polynomial log integral did not converge")
        total += vals[1]
    return float(total)
