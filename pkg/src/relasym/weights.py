"""Intervals, structured weight expressions and measures.

A weight is a product of factors drawn from five classes.  Every class except
``ExpPoly`` has a logarithm that is a sum of ``log|x - r|`` terms plus a
constant, which is what lets the Szegő module and the quadrature rules treat
zeros and edge singularities exactly.

Polynomials are tuples of float coefficients in ascending order (the
``numpy.polynomial`` convention).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from mpmath.ctx_mp_python import _mpf
from numpy.polynomial import polynomial as P

from .errors import InvalidWeight
from .precision import Arith

Poly = Tuple[float, ...]


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (float(self.a) < float(self.b)):
            raise ValueError(f"interval endpoints must satisfy a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def mid(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def half(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def length(self) -> float:
        return self.b - self.a

    def intersects(self, other: "Interval") -> bool:
        return not (self.b < other.a or other.b < self.a)

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b

    def to_unit(self, z, arith: Arith | None = None):
        """Affine map of the interval onto [-1, 1]."""
        if arith is None or not arith.is_mp:
            return (z - self.mid) / self.half
        ctx = arith.ctx
        return (z - ctx.mpf(self.mid)) / ctx.mpf(self.half)

    def from_unit(self, u, arith: Arith | None = None):
        if arith is None or not arith.is_mp:
            return self.mid + self.half * u
        ctx = arith.ctx
        return ctx.mpf(self.mid) + ctx.mpf(self.half) * u

    def distance(self, z) -> float:
        z = complex(z)
        x = min(max(z.real, self.a), self.b)
        return abs(z - x)

    def chebyshev_points(self, m: int) -> np.ndarray:
        """First-kind Chebyshev points, increasing."""
        theta = (np.arange(m)[::-1] + 0.5) * np.pi / m
        return self.mid + self.half * np.cos(theta)

    def __str__(self):
        return f"[{self.a!r}, {self.b!r}]"


def _poly(coeffs) -> Poly:
    c = tuple(float(v) for v in np.atleast_1d(np.asarray(coeffs, dtype=float)))
    # trim trailing zeros but keep at least the constant term
    while len(c) > 1 and c[-1] == 0.0:
        c = c[:-1]
    return c


def poly_eval(coeffs: Poly, x, arith: Arith | None = None):
    """Horner evaluation; works for float, complex and mp object arrays."""
    if arith is not None and arith.is_mp:
        cs = [arith.ctx.mpf(c) for c in coeffs]
    else:
        cs = list(coeffs)
    acc = cs[-1] + 0 * x
    for c in reversed(cs[:-1]):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=256)
def poly_roots(coeffs: Poly, bits: int = 53) -> tuple:
    """Roots of a real polynomial, real ones returned as real numbers.

    At extended precision the roots are recomputed with mpmath's
    Durand-Kerner iteration at the requested precision.
    """
    deg = len(coeffs) - 1
    if deg < 1:
        return ()
    if bits <= 53:
        rts = P.polyroots(np.asarray(coeffs, dtype=float))
        out = []
        for r in rts:
            if abs(r.imag) <= 1e-12 * max(1.0, abs(r)):
                out.append(float(r.real))
            else:
                out.append(complex(r))
        return tuple(sorted(out, key=lambda r: (np.real(r), np.imag(r))))
    from .precision import arith_for_bits

    ctx = arith_for_bits(bits).ctx
    rts = ctx.polyroots([ctx.mpf(c) for c in reversed(coeffs)], maxsteps=200, extraprec=2 * bits)
    out = []
    for r in rts:
        r = ctx.mpc(r)
        if abs(r.imag) <= ctx.mpf(2) ** (-bits // 2) * max(1, abs(r)):
            out.append(ctx.mpf(r.real))
        else:
            out.append(r)
    return tuple(sorted(out, key=lambda r: (float(ctx.re(r)), float(ctx.im(r)))))


def is_real_root(r) -> bool:
    return isinstance(r, (float, int, np.floating, _mpf))


# ---------------------------------------------------------------------------
# factor classes


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidWeight(f"Constant factor must be positive, got {self.c}")
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True)
class JacobiEdge:
    """(b - x)^alpha (x - a)^beta on the host interval [a, b]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise InvalidWeight("JacobiEdge exponents must exceed -1")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class AbsPolyFactor:
    """|p(x)|^gamma with p real and monic."""

    p: Poly
    gamma: float = 1.0

    def __post_init__(self):
        p = _poly(self.p)
        if len(p) < 2:
            raise InvalidWeight("AbsPolyFactor needs a polynomial of degree >= 1")
        if abs(p[-1] - 1.0) > 1e-14:
            raise InvalidWeight("AbsPolyFactor polynomial must be monic")
        if not self.gamma > 0:
            raise InvalidWeight("AbsPolyFactor exponent must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class ExpPoly:
    p: Poly

    def __post_init__(self):
        object.__setattr__(self, "p", _poly(self.p))


@dataclass(frozen=True)
class RationalPositive:
    num: Poly
    den: Poly = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "num", _poly(self.num))
        object.__setattr__(self, "den", _poly(self.den))
        if self.num == (0.0,) or self.den == (0.0,):
            raise InvalidWeight("RationalPositive needs nonzero numerator and denominator")


Factor = Union[Constant, JacobiEdge, AbsPolyFactor, ExpPoly, RationalPositive]


@dataclass(frozen=True)
class LogRoot:
    """One ``exponent * log|x - root|`` term of a log-weight."""

    root: object  # float, complex, or mp number
    exponent: float


@dataclass(frozen=True)
class WeightExpr:
    factors: Tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __mul__(self, other: "WeightExpr") -> "WeightExpr":
        if isinstance(other, WeightExpr):
            return WeightExpr(self.factors + other.factors)
        return NotImplemented

    @property
    def is_trivial(self) -> bool:
        return all(isinstance(f, Constant) and f.c == 1.0 for f in self.factors)

    def constant_value(self):
        """The constant if every factor is a Constant, else None."""
        if all(isinstance(f, Constant) for f in self.factors):
            return float(np.prod([f.c for f in self.factors])) if self.factors else 1.0
        return None

    # -- structure ----------------------------------------------------------
    def log_decomposition(self, interval: Interval, bits: int = 53):
        """Split w into (scale factors, [LogRoot...], exp-polynomial).

        ``w(x) = prod(scales) * prod |x - r_i|^e_i * exp(q(x))`` on the interval.
        Scales are kept multiplicative so extended-precision evaluation stays
        exact; a negative entry ``-c`` stands for the divisor ``c``.
        """
        scales = []
        terms = []
        q = np.zeros(1)
        for f in self.factors:
            if isinstance(f, Constant):
                scales.append(f.c)
            elif isinstance(f, JacobiEdge):
                if f.alpha:
                    terms.append(LogRoot(interval.b, f.alpha))
                if f.beta:
                    terms.append(LogRoot(interval.a, f.beta))
            elif isinstance(f, AbsPolyFactor):
                for r in poly_roots(f.p, bits):
                    terms.append(LogRoot(r, f.gamma))
            elif isinstance(f, ExpPoly):
                q = P.polyadd(q, np.asarray(f.p))
            elif isinstance(f, RationalPositive):
                scales.append(abs(f.num[-1]))
                scales.append(-abs(f.den[-1]))
                for r in poly_roots(f.num, bits):
                    terms.append(LogRoot(r, 1.0))
                for r in poly_roots(f.den, bits):
                    terms.append(LogRoot(r, -1.0))
        return tuple(scales), terms, tuple(float(v) for v in q)

    def edge_exponents(self, interval: Interval, bits: int = 53):
        """Real singular points of the weight on [a, b] with summed exponents.

        Returns a sorted list of ``(location, exponent)``; endpoints are always
        present (possibly with exponent 0).
        """
        _, terms, _ = self.log_decomposition(interval, bits)
        tol = 1e-12 * interval.length
        pts = {interval.a: 0.0, interval.b: 0.0}
        for t in terms:
            r = t.root
            if not is_real_root(r):
                continue
            rf = float(r)
            if rf < interval.a - tol or rf > interval.b + tol:
                continue
            key = None
            for k in pts:
                if abs(float(k) - rf) <= tol:
                    key = k
                    break
            if key is None:
                key = r
                pts[key] = 0.0
            pts[key] += t.exponent
        return sorted(pts.items(), key=lambda kv: float(kv[0]))

    def evaluate(self, x, interval: Interval, arith: Arith, skip=()):
        """Weight value at x; ``log|x - s|`` terms for s in ``skip`` are omitted."""
        scales, terms, q = self.log_decomposition(interval, arith.bits)
        skipf = [float(s) for s in skip]
        tol = 1e-12 * interval.length
        out = arith.ones(np.shape(x)) if np.ndim(x) else (arith.real(1))
        for c in scales:
            if c > 0 and c != 1.0:
                out = out * arith.real(c)
            elif c < 0 and c != -1.0:
                out = out / arith.real(-c)
        for t in terms:
            r = t.root
            if is_real_root(r) and any(abs(float(r) - s) <= tol for s in skipf):
                continue
            if arith.is_mp:
                d = abs(x - r) if np.ndim(x) == 0 else np.abs(x - r)
                out = out * _mp_pow(d, t.exponent, arith)
            else:
                out = out * np.abs(x - r) ** t.exponent
        if len(q) > 1 or q[0] != 0.0:
            out = out * arith.exp(poly_eval(q, x, arith))
        return out

    def validate(self, interval: Interval, samples: int = 257):
        for f in self.factors:
            if isinstance(f, RationalPositive):
                for poly in (f.num, f.den):
                    for r in poly_roots(poly):
                        if is_real_root(r) and interval.a <= r <= interval.b:
                            raise InvalidWeight(
                                "RationalPositive numerator/denominator vanishes inside the interval"
                            )
                xs = interval.chebyshev_points(samples)
                val = P.polyval(xs, f.num) / P.polyval(xs, f.den)
                if np.any(val <= 0):
                    raise InvalidWeight("RationalPositive factor is not positive on the interval")
        from .precision import arith_for_bits

        xs = interval.chebyshev_points(samples)
        w = self.evaluate(xs, interval, arith_for_bits(53))
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidWeight("weight is negative or non-finite on the interval")
        if np.count_nonzero(w == 0) > 0:
            # zeros may only sit at isolated roots; the sample grid avoids them generically
            raise InvalidWeight("weight vanishes at a sample point")


def _mp_pow(d, e, arith):
    ctx = arith.ctx
    if float(e) == int(e) and e >= 0:
        return d ** int(e)
    ee = ctx.mpf(e)
    if np.ndim(d):
        return np.frompyfunc(lambda v: ctx.power(v, ee), 1, 1)(d)
    return ctx.power(d, ee)


def weight(*factors: Factor) -> WeightExpr:
    return WeightExpr(tuple(factors))


LEBESGUE = WeightExpr((Constant(1.0),))
ARCSINE = WeightExpr((JacobiEdge(-0.5, -0.5),))


@dataclass(frozen=True)
class MeasureSpec:
    interval: Interval
    weight: WeightExpr = field(default=LEBESGUE)

    def perturbed(self, rho: WeightExpr | None) -> "MeasureSpec":
        if rho is None:
            return self
        return MeasureSpec(self.interval, self.weight * rho)

    def density(self, x, arith: Arith, skip=()):
        return self.weight.evaluate(x, self.interval, arith, skip)

    def validate(self):
        self.weight.validate(self.interval)
        return self
