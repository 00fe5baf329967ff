"""Szegő-type functions G_[a,b](rho; z) of a positive weight on an interval.

With u = (z - mid)/half, Phi = u + sqrt(u^2 - 1) and the cosine series
``log rho(x(theta)) = a0/2 + sum_j a_j cos(j theta)`` one has

    G(z) = exp(-(a0/2 + sum_j a_j Phi^-j) / 2).

Every log|x - r| factor has the closed-form series
``log(half |phi_r| / 2) - sum_j (2/j) Re(phi_r^-j) cos(j theta)``, which sums
to two logarithms, so zeros and edge singularities of the weight are exact.
Polynomial exponents and sampled grid functions enter through their
Chebyshev coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.fft import dct

from .branches import exterior_map
from .errors import EvalOnSupport, NonPositiveWeight, NotConverged
from .precision import PrecisionConfig
from .quadrature import log_equilibrium_integral
from .weights import Constant, Interval, WeightExpr, is_real_root


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Positive function given by samples at first-kind Chebyshev points (increasing x)."""

    interval: Interval
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("grid samples must form a non-empty vector")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise NonPositiveWeight("grid samples must be finite and strictly positive")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.chebyshev_points(self.size)

    def log_coeffs(self) -> np.ndarray:
        """Chebyshev coefficients of the interpolant of log(values) (in u)."""
        # chebyshev_points is increasing; the DCT wants theta increasing
        f = np.log(self.values[::-1])
        b = dct(f, type=2) / self.size
        b[0] /= 2
        return b

    def __call__(self, x):
        """exp of the Chebyshev interpolant of the log samples."""
        u = self.interval.to_unit(np.asarray(x, dtype=float))
        return np.exp(C.chebval(u, self.log_coeffs()))

    @classmethod
    def sample(cls, f, interval: Interval, m: int) -> "GridFunction":
        return cls(interval, np.asarray(f(interval.chebyshev_points(m)), dtype=float))


@dataclass(frozen=True, eq=False)
class SzegoFn:
    """log rho = const + sum_r e_r log|x - r| + Chebyshev series in u, on ``interval``.

    ``roots`` holds ``(phi_r, e_r)`` with phi_r the exterior map of the
    normalized root; ``cheb`` holds coefficients of degree >= 1.
    """

    interval: Interval
    const: float
    roots: Tuple[Tuple[complex, float], ...] = ()
    cheb: np.ndarray = field(default_factory=lambda: np.zeros(1))
    tol: float = 1e-13

    # algebra -----------------------------------------------------------------
    def _combine(self, other: "SzegoFn", sign: float) -> "SzegoFn":
        if other.interval != self.interval:
            raise ValueError("Szegő functions live on different intervals")
        n = max(len(self.cheb), len(other.cheb))
        c = np.zeros(n)
        c[: len(self.cheb)] += self.cheb
        c[: len(other.cheb)] += sign * other.cheb
        roots = self.roots + tuple((p, sign * e) for p, e in other.roots)
        return SzegoFn(self.interval, self.const + sign * other.const, roots, c, self.tol)

    def times(self, other: "SzegoFn") -> "SzegoFn":
        """Szegő function of the product weight."""
        return self._combine(other, 1.0)

    def over(self, other: "SzegoFn") -> "SzegoFn":
        """Szegő function of the quotient weight."""
        return self._combine(other, -1.0)

    # evaluation ----------------------------------------------------------------
    def exponent(self, z):
        """E(z) = a0/2 + sum a_j Phi^-j, so that G = exp(-E/2)."""
        z = np.asarray(z, dtype=complex)
        u = self.interval.to_unit(z)
        phi = exterior_map(u)
        inv = 1.0 / phi
        E = np.full(z.shape, self.const, dtype=complex)
        for p, e in self.roots:
            E += e * (np.log(1 - inv / p) + np.log(1 - inv / np.conj(p)))
        if len(self.cheb) > 1:
            # Horner in 1/Phi over coefficients of degree >= 1
            acc = np.zeros(z.shape, dtype=complex)
            for b in self.cheb[:0:-1]:
                acc = (acc + b) * inv
            E += acc
        return E

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        dist = np.vectorize(self.interval.distance, otypes=[float])(z) if z.ndim else self.interval.distance(complex(z))
        if np.any(np.asarray(dist) < self.tol):
            raise EvalOnSupport("Szegő function evaluated on its interval")
        return np.exp(-self.exponent(z) / 2)

    def at_infinity(self) -> float:
        return float(np.exp(-self.const / 2))

    def log_weight(self, x):
        """log rho(x) reconstructed from the representation (x inside the interval)."""
        x = np.asarray(x, dtype=float)
        u = self.interval.to_unit(x)
        theta = np.arccos(np.clip(u, -1, 1))
        w = np.exp(1j * theta)
        out = np.full(x.shape, self.const)
        for p, e in self.roots:
            out = out + e * (np.log(np.abs(1 - w / p)) + np.log(np.abs(1 - np.conj(w) / p)))
        if len(self.cheb) > 1:
            c = self.cheb.copy()
            c[0] = 0.0
            out = out + C.chebval(u, c)
        return out


def _roots_part(w: WeightExpr, interval: Interval):
    scales, terms, q = w.log_decomposition(interval, 53)
    const = 0.0
    for c in scales:
        const += np.log(abs(c)) * (1 if c > 0 else -1)
    roots = []
    for t in terms:
        r = float(t.root) if is_real_root(t.root) else complex(t.root)
        u = interval.to_unit(r)
        phi = complex(exterior_map(np.complex128(u)))
        if is_real_root(t.root) and abs(u) <= 1:
            # on the interval: pick the unimodular value explicitly
            phi = complex(u, np.sqrt(max(0.0, 1 - u * u)))
        const += t.exponent * (np.log(interval.half) + np.log(abs(phi) / 2))
        roots.append((phi, t.exponent))
    cheb = np.zeros(1)
    if len(q) > 1 or q[0] != 0.0:
        # q(mid + half u) as a Chebyshev series in u
        lin = np.array([interval.mid, interval.half])
        qu = np.zeros(1)
        powk = np.ones(1)
        for ck in q:
            qu = P.polyadd(qu, ck * powk)
            powk = P.polymul(powk, lin)
        cheb = C.poly2cheb(qu)
    return const, tuple(roots), np.asarray(cheb, dtype=float)


def szego_function(interval: Interval, rho, cfg: PrecisionConfig | None = None) -> SzegoFn:
    """Build G_[a,b](rho; .) for a WeightExpr, a GridFunction or a positive constant."""
    cfg = cfg or PrecisionConfig()
    tol = cfg.root_tol
    if isinstance(rho, (int, float)):
        if not rho > 0:
            raise NonPositiveWeight("constant weight must be positive")
        rho = WeightExpr((Constant(float(rho)),))
    if isinstance(rho, WeightExpr):
        const, roots, cheb = _roots_part(rho, interval)
        c0 = cheb[0] if len(cheb) else 0.0
        cheb = cheb.copy()
        cheb[0] = 0.0
        return SzegoFn(interval, const + c0, roots, cheb, tol)
    if isinstance(rho, GridFunction):
        if rho.interval != interval:
            raise ValueError("grid function lives on another interval")
        b = rho.log_coeffs()
        c0 = b[0]
        b = b.copy()
        b[0] = 0.0
        return SzegoFn(interval, c0, (), b, tol)
    raise TypeError(f"unsupported weight type {type(rho).__name__}")


def szego_eval(S: SzegoFn, z):
    return S(z)


def eval_infinity(S: SzegoFn) -> float:
    return S.at_infinity()


def eval_infinity_from_integral(rho: WeightExpr, interval: Interval) -> float:
    """exp(-(1/2pi) int log rho dx/sqrt((b-x)(x-a))), an independent route to G(inf)."""
    return float(np.exp(-log_equilibrium_integral(rho, interval) / (2 * np.pi)))


def boundary_modulus_check(S: SzegoFn, x: float, rho_at_x: float | None = None,
                           y0: float = 1e-2, tol: float = 1e-9):
    """(lim_{y->0+} |G(x+iy)|^2, 1/rho(x)) by Richardson extrapolation in y.

    ``rho_at_x`` defaults to the value reconstructed from the representation.
    """
    if not (S.interval.a < x < S.interval.b):
        raise ValueError("x must be an interior point")
    ys = y0 * 0.5 ** np.arange(12)
    vals = np.abs(S(x + 1j * ys)) ** 2
    # Richardson table on the sequence h, h/2, h/4, ...
    T = [vals]
    best = None
    for k in range(1, 5):
        prev = T[-1]
        T.append((2**k * prev[1:] - prev[:-1]) / (2**k - 1))
    for row in T[1:]:
        if len(row) >= 2 and abs(row[-1] - row[-2]) <= tol * abs(row[-1]):
            best = row[-1]
            break
    if best is None:
        raise NotConverged("boundary modulus y-ladder did not stabilize")
    rhs = 1.0 / rho_at_x if rho_at_x is not None else float(np.exp(-S.log_weight(x)))
    return float(best), float(rhs)


def szego_quadrature(interval: Interval, rho: WeightExpr, z, tol: float = 1e-13):
    """G(z) from adaptive quadrature of the defining integral (independent check).

    E(z) = (1/pi) int_0^pi log rho(x(theta)) sqrt(u^2-1) / (u - cos theta) dtheta
    with u the normalized variable, and G = exp(-E/2).
    """
    from scipy.integrate import quad_vec

    from .branches import unit_sqrt

    z = np.atleast_1d(np.asarray(z, dtype=complex))
    u = interval.to_unit(z)
    s = unit_sqrt(u)
    scales, terms, q = rho.log_decomposition(interval, 53)
    const = sum(np.log(abs(c)) * (1 if c > 0 else -1) for c in scales)
    # theta = pi (1 - cos(pi t)) / 2 flattens log singularities at the endpoints
    breaks = sorted(
        float(np.arccos(1 - 2 * np.arccos(np.clip(interval.to_unit(float(t.root)), -1, 1)) / np.pi) / np.pi)
        for t in terms
        if is_real_root(t.root) and interval.a < float(t.root) < interval.b
    )

    def log_rho(theta):
        x = interval.from_unit(np.cos(theta))
        out = const + P.polyval(x, q)
        for t in terms:
            r = t.root
            if is_real_root(r) and float(r) == interval.b:
                d = 2 * interval.half * np.sin(theta / 2) ** 2
            elif is_real_root(r) and float(r) == interval.a:
                d = 2 * interval.half * np.cos(theta / 2) ** 2
            else:
                d = abs(x - complex(r))
            # a root hit exactly is a null set for the integral
            out += t.exponent * np.log(d) if d > 0 else 0.0
        return out

    def f(t):
        theta = np.pi * (1 - np.cos(np.pi * t)) / 2
        jac = np.pi**2 / 2 * np.sin(np.pi * t)
        v = log_rho(theta) * jac * s / (u - np.cos(theta))
        return np.concatenate([v.real, v.imag])

    val, _ = quad_vec(f, 0.0, 1.0, epsabs=tol, epsrel=tol, points=breaks or None, limit=2000)
    E = (val[: z.size] + 1j * val[z.size:]) / np.pi
    return np.exp(-E / 2)
