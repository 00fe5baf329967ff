"""The contraction T on positive function pairs and its fixed point Phi.

A pair f = (f1, f2) holds f1 on Delta2 and f2 on Delta1, each as positive
samples at M first-kind Chebyshev points.  Values between nodes come from
the Chebyshev interpolant of log f, so interpolants stay positive and the
same representation feeds the Szegő module without conversion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import GridMismatch, MaxIterations, NonPositiveSample, NonPositiveWeight
from .precision import PrecisionConfig
from .szego import GridFunction, SzegoFn, szego_function
from .weights import Interval, WeightExpr

DEFAULT_M = 64
CONTRACTION = 0.5


@dataclass(frozen=True, eq=False)
class GridFnPair:
    """(f1 on Delta2, f2 on Delta1) sampled at M Chebyshev points each."""

    delta1: Interval
    delta2: Interval
    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        f1 = np.asarray(self.f1, dtype=float)
        f2 = np.asarray(self.f2, dtype=float)
        if f1.shape != f2.shape or f1.ndim != 1:
            raise GridMismatch("components must share one grid size")
        for v in (f1, f2):
            if not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise NonPositiveSample("pair samples must be finite and strictly positive")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)

    @property
    def M(self) -> int:
        return self.f1.size

    def component(self, k: int) -> GridFunction:
        """f1 as a function on Delta2, f2 as a function on Delta1."""
        return GridFunction(self.delta2, self.f1) if k == 1 else GridFunction(self.delta1, self.f2)

    def grid(self, k: int) -> np.ndarray:
        return (self.delta2 if k == 1 else self.delta1).chebyshev_points(self.M)

    def dense(self, k: int, factor: int = 4):
        """Interpolated values at factor*M Chebyshev points (positivity check included)."""
        iv = self.delta2 if k == 1 else self.delta1
        x = iv.chebyshev_points(factor * self.M)
        v = self.component(k)(x)
        if np.any(v <= 0):
            raise NonPositiveSample("interpolant is not positive")
        return x, v

    @classmethod
    def constant(cls, delta1: Interval, delta2: Interval, u: float, v: float, M: int = DEFAULT_M):
        return cls(delta1, delta2, np.full(M, float(u)), np.full(M, float(v)))

    @classmethod
    def from_functions(cls, delta1, delta2, g1, g2, M: int = DEFAULT_M):
        """Sample g1 on Delta2 and g2 on Delta1."""
        return cls(delta1, delta2, g1(delta2.chebyshev_points(M)), g2(delta1.chebyshev_points(M)))

    def resample(self, M: int) -> "GridFnPair":
        return GridFnPair(
            self.delta1, self.delta2,
            self.component(1)(self.delta2.chebyshev_points(M)),
            self.component(2)(self.delta1.chebyshev_points(M)),
        )


def _check_same(f: GridFnPair, g: GridFnPair):
    if f.M != g.M or f.delta1 != g.delta1 or f.delta2 != g.delta2:
        raise GridMismatch(f"pairs live on different grids (M={f.M} vs M={g.M})")


def sup_norm_delta(f: GridFnPair, g: GridFnPair) -> float:
    """max_k sup |f_k - g_k| over dense interpolation points and the nodes."""
    _check_same(f, g)
    out = 0.0
    for k in (1, 2):
        _, a = f.dense(k)
        _, b = g.dense(k)
        a0, b0 = (f.f1, g.f1) if k == 1 else (f.f2, g.f2)
        out = max(out, float(np.max(np.abs(a - b))), float(np.max(np.abs(a0 - b0))))
    return out


def metric_d(f: GridFnPair, g: GridFnPair) -> float:
    """max_k sup |log(f_k / g_k)|."""
    _check_same(f, g)
    out = 0.0
    for k in (1, 2):
        _, a = f.dense(k)
        _, b = g.dense(k)
        a0, b0 = (f.f1, g.f1) if k == 1 else (f.f2, g.f2)
        out = max(out, float(np.max(np.abs(np.log(a / b)))), float(np.max(np.abs(np.log(a0 / b0)))))
    return out


def _rho_szego(iv: Interval, rho, cfg) -> SzegoFn:
    return szego_function(iv, rho if rho is not None else 1.0, cfg)


def T_components(rho1, rho2, f: GridFnPair, cfg: PrecisionConfig | None = None):
    """Szegő functions (G_D1(rho1/f2), G_D2(rho2/f1)) that define T(f)."""
    cfg = cfg or PrecisionConfig()
    S1 = _rho_szego(f.delta1, rho1, cfg).over(szego_function(f.delta1, f.component(2), cfg))
    S2 = _rho_szego(f.delta2, rho2, cfg).over(szego_function(f.delta2, f.component(1), cfg))
    return S1, S2


def _real_positive(vals, what):
    vals = np.asarray(vals)
    if np.max(np.abs(vals.imag)) > 1e-12 * np.max(np.abs(vals.real)):
        raise NonPositiveWeight(f"{what} is not real on the opposite interval")
    out = vals.real
    if np.any(out <= 0):
        raise NonPositiveSample(f"{what} is not positive")
    return out


def apply_T(rho1, rho2, f: GridFnPair, cfg: PrecisionConfig | None = None) -> GridFnPair:
    """T(f) = (G_D1(rho1/f2) on Delta2, G_D2(rho2/f1) on Delta1)."""
    S1, S2 = T_components(rho1, rho2, f, cfg)
    g1 = _real_positive(S1(f.grid(1)), "f1*")
    g2 = _real_positive(S2(f.grid(2)), "f2*")
    return GridFnPair(f.delta1, f.delta2, g1, g2)


@dataclass(frozen=True, eq=False)
class PhiResult:
    phi: GridFnPair
    certified_d_error: float
    iterations: int
    S1: SzegoFn
    S2: SzegoFn
    history: List[float] = field(default_factory=list)
    residual: float = 0.0

    def __call__(self, k: int, z):
        return (self.S1 if k == 1 else self.S2)(z)

    def at_infinity(self, k: int) -> float:
        return (self.S1 if k == 1 else self.S2).at_infinity()

    def log_lines(self):
        for i, d in enumerate(self.history, start=1):
            yield {"iteration": i, "d_step": d}


def solve_phi(rho1, rho2, delta1: Interval, delta2: Interval, tol: float = 1e-10, M: int = DEFAULT_M,
              cfg: PrecisionConfig | None = None, max_iter: int = 200) -> PhiResult:
    """Banach iteration from (1,1) until d(f_{m+1}, f_m) <= tol/2.

    With contraction constant 1/2 the tail bound gives
    d(f_{m+1}, Phi) <= d(f_{m+1}, f_m), which is the certified error.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    cfg = cfg or PrecisionConfig()
    f = GridFnPair.constant(delta1, delta2, 1.0, 1.0, M)
    history = []
    for it in range(1, max_iter + 1):
        g = apply_T(rho1, rho2, f, cfg)
        d = metric_d(g, f)
        history.append(d)
        f = g
        if d <= tol / 2:
            S1, S2 = T_components(rho1, rho2, f, cfg)
            res = metric_d(apply_T(rho1, rho2, f, cfg), f)
            return PhiResult(f, d, it, S1, S2, history, res)
    ratio = history[-1] / history[-2] if len(history) > 1 and history[-2] > 0 else float("nan")
    raise MaxIterations(max_iter, ratio)


def eval_phi(P: PhiResult, k: int, z):
    """Phi_k(z) = G_{Delta_k}(rho_k / Phi_other; z) off Delta_k."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    return P(k, z)


def constant_phi(c1: float, c2: float):
    """Closed form of Phi for constant weights."""
    return c1 ** (-2 / 3) * c2 ** (-1 / 3), c1 ** (-1 / 3) * c2 ** (-2 / 3)


def random_pair(delta1: Interval, delta2: Interval, rng: np.random.Generator, M: int = DEFAULT_M,
                amplitude: float = 1.0, terms: int = 6) -> GridFnPair:
    """Smooth random element of C_Delta^+: exp of a short random Chebyshev series."""
    from numpy.polynomial import chebyshev as C

    def one(iv):
        c = rng.normal(size=terms) * amplitude / (1 + np.arange(terms)) ** 2
        return np.exp(C.chebval(iv.to_unit(iv.chebyshev_points(M)), c))

    return GridFnPair(delta1, delta2, one(delta2), one(delta1))
