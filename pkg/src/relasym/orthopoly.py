"""Monic orthogonal polynomials for constant-sign (varying) measures."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chebpoly import ChebPoly, cheb_vandermonde, monic_lead
from .errors import InvalidWeight, NotConverged
from .linalg import solve
from .precision import PrecisionConfig
from .quadrature import measure_rule
from .roots import roots_in_interval
from .weights import MeasureSpec


@dataclass(frozen=True, eq=False)
class VaryingMeasure:
    """``extra_weight(x) * dbase(x)``; the extra factor must keep one sign.

    ``extra_weight`` receives an array of abscissae in working precision and
    returns real values of the same kind.  ``None`` means the factor 1.
    """

    base: MeasureSpec
    extra_weight: Optional[Callable] = None
    sign: Optional[int] = None

    def weight_at(self, x):
        if self.extra_weight is None:
            return 1 + 0 * x
        return self.extra_weight(x)

    def observed_sign(self, samples: int, arith) -> int:
        xs = arith.real(self.base.interval.chebyshev_points(samples))
        vals = self.weight_at(xs) * self.base.density(xs, arith)
        s = np.sign(arith.to_float(vals))
        s = s[s != 0]
        if s.size == 0:
            raise InvalidWeight("measure vanishes on the sample grid")
        if not (np.all(s > 0) or np.all(s < 0)):
            raise InvalidWeight("varying measure changes sign on its interval")
        return int(s[0])

    def checked(self, degree: int, arith) -> "VaryingMeasure":
        s = self.observed_sign(4 * degree + 64, arith)
        if self.sign is not None and self.sign != s:
            raise InvalidWeight(f"declared sign {self.sign} but observed {s}")
        return VaryingMeasure(self.base, self.extra_weight, s)


@dataclass(frozen=True, eq=False)
class OrthoResult:
    monic: ChebPoly
    norm: object
    orthonormal_lead: object
    sign: int
    residual: float
    mass: object

    @property
    def degree(self) -> int:
        return self.monic.degree


def gram_system(mu: VaryingMeasure, N: int, cfg: PrecisionConfig, order: int | None = None):
    """Weighted Chebyshev Vandermonde ``V`` and weights ``W`` of the rule for mu."""
    arith = cfg.arith
    rule = measure_rule(mu.base, order or cfg.quad_order, cfg.mantissa_bits)
    W = rule.weights * mu.weight_at(rule.nodes)
    u = mu.base.interval.to_unit(rule.nodes, arith)
    V = cheb_vandermonde(u, N, arith)
    return V, W


def _residual(V, W, c, N, norm, mass):
    r = (V[:, :N] * W[:, None]).T @ (V @ c) if N else np.zeros(0)
    if N == 0:
        return 0.0
    scale = float(norm) * float(abs(mass)) ** 0.5
    return float(np.max(np.abs(np.asarray([float(abs(v)) for v in r])))) / scale


def monic_orthogonal(mu: VaryingMeasure, N: int, cfg: PrecisionConfig | None = None,
                     check_zeros: bool = True) -> OrthoResult:
    """Monic degree-N orthogonal polynomial for ``mu`` via its Chebyshev Gram system.

    The residual reported is ``max_nu |int T_nu P dmu| / (||P|| |mu|^{1/2})``,
    the natural Cauchy-Schwarz scale, computed on the same rule.
    """
    cfg = cfg or PrecisionConfig()
    arith = cfg.arith
    mu = mu.checked(N, arith)
    iv = mu.base.interval
    V, W = gram_system(mu, N, cfg)
    lead = monic_lead(N, iv, arith)
    if N == 0:
        c = arith.ones(1)
    else:
        VW = V[:, :N] * W[:, None]
        A = VW.T @ V[:, :N]
        b = -(VW.T @ V[:, N]) * lead
        x = solve(A, b)
        c = np.concatenate([x, np.array([lead], dtype=x.dtype)])
    vals = V @ c
    sq = (W * vals * vals).sum()
    mass = W.sum()
    norm = abs(sq) ** 0.5 if not arith.is_mp else arith.ctx.sqrt(abs(sq))
    res = _residual(V, W, c, N, norm, mass)
    if res > cfg.residual_tol:
        raise NotConverged(f"orthogonality residual {res:.3g} exceeds {cfg.residual_tol:.1g}")
    poly = ChebPoly(iv, c, arith, monic=True)
    if check_zeros and N:
        roots_in_interval(poly, iv, N, cfg)
    return OrthoResult(poly, norm, 1 / norm, mu.sign, res, mass)


def orthonormal_eval(r: OrthoResult, z):
    """Orthonormal polynomial with positive leading coefficient at z."""
    return r.monic(z) / r.norm
