"""Real polynomials stored in the Chebyshev basis of a host interval."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .precision import Arith
from .weights import Interval


def cheb_vandermonde(u, degree: int, arith: Arith):
    """Matrix ``V[i, j] = T_j(u_i)`` for j = 0..degree."""
    u = np.asarray(u, dtype=object if arith.is_mp else None)
    V = arith.zeros((u.shape[0], degree + 1)) if arith.is_mp else np.zeros((u.shape[0], degree + 1), dtype=u.dtype)
    one = arith.real(1)
    V[:, 0] = one
    if degree >= 1:
        V[:, 1] = u
    for j in range(2, degree + 1):
        V[:, j] = 2 * u * V[:, j - 1] - V[:, j - 2]
    return V


def clenshaw(coeffs, u):
    """Evaluate sum c_j T_j(u); u may be scalar or array, real or complex."""
    n = len(coeffs)
    if n == 1:
        return coeffs[0] + 0 * u
    b1 = 0 * u
    b2 = 0 * u
    for c in coeffs[:0:-1]:
        b1, b2 = c + 2 * u * b1 - b2, b1
    return coeffs[0] + u * b1 - b2


def monic_lead(degree: int, interval: Interval, arith: Arith):
    """Chebyshev coefficient of T_degree that makes the polynomial monic in x."""
    if degree == 0:
        return arith.real(1)
    two = arith.real(2)
    half = arith.real(interval.half)
    # T_N(u) = 2^{N-1} u^N + ..., u = (x - mid)/half
    return half**degree / two ** (degree - 1)


@dataclass(frozen=True, eq=False)
class ChebPoly:
    ref_interval: Interval
    coeffs: np.ndarray
    arith: Arith
    monic: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=object if self.arith.is_mp else float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty vector")
        if c.size > 1 and c[-1] == 0:
            raise ValueError("leading Chebyshev coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return clenshaw(self.coeffs, self.ref_interval.to_unit(z, self.arith))

    def leading_coefficient(self):
        """Leading coefficient in the monomial basis of x."""
        return self.coeffs[-1] / monic_lead(self.degree, self.ref_interval, self.arith)

    def scaled(self, c) -> "ChebPoly":
        return ChebPoly(self.ref_interval, self.coeffs * c, self.arith, monic=False)

    def normalized(self) -> "ChebPoly":
        """Monic rescaling."""
        return ChebPoly(self.ref_interval, self.coeffs / self.leading_coefficient(), self.arith, monic=True)

    def with_arith(self, arith: Arith) -> "ChebPoly":
        if arith.bits == self.arith.bits:
            return self
        return ChebPoly(self.ref_interval, arith.real(self.coeffs), arith, self.monic)

    def float_coeffs(self) -> np.ndarray:
        return self.arith.to_float(self.coeffs)

    @classmethod
    def one(cls, interval: Interval, arith: Arith) -> "ChebPoly":
        return cls(interval, arith.ones(1), arith, monic=True)

    @classmethod
    def from_roots(cls, roots, interval: Interval, arith: Arith) -> "ChebPoly":
        """Monic polynomial with the given real roots."""
        mid = arith.real(interval.mid)
        half = arith.real(interval.half)
        c = list(arith.ones(1))
        for r in roots:
            r = arith.real(r)
            n = len(c)
            out = [0 * half] * (n + 1)
            # u * T_j = (T_{j+1} + T_{j-1}) / 2, T_0 * u = T_1
            for j, cj in enumerate(c):
                if j == 0:
                    out[1] = out[1] + half * cj
                else:
                    out[j + 1] = out[j + 1] + half * cj / 2
                    out[j - 1] = out[j - 1] + half * cj / 2
                out[j] = out[j] + (mid - r) * cj
            c = out
        return cls(interval, np.array(c, dtype=object if arith.is_mp else float), arith, monic=True)

    def monomial_coeffs(self) -> np.ndarray:
        """Float64 monomial coefficients (ascending) in x; for display only."""
        from numpy.polynomial import chebyshev as C
        from numpy.polynomial import polynomial as Pm

        pu = C.cheb2poly(self.float_coeffs())
        # substitute u = (x - mid)/half
        lin = np.array([-self.ref_interval.mid / self.ref_interval.half, 1.0 / self.ref_interval.half])
        out = np.zeros(1)
        powk = np.ones(1)
        for ck in pu:
            out = Pm.polyadd(out, ck * powk)
            powk = Pm.polymul(powk, lin)
        return out
