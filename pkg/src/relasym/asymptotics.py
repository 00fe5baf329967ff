"""Convergence tables for the relative asymptotics of Nikishin MOPs.

For each multi-index the perturbed and plain bundles are computed once and
all tracked quantities are compared with their predicted limits built from
the fixed point Phi of T.  The classical scalar baselines (Szegő and
relative asymptotics of ordinary orthogonal polynomials) run through the
same record type.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .branches import interval_sqrt
from .contours import ellipse_contour
from .fixedpoint import PhiResult, solve_phi
from .nikishin import MopBundle, MultiIndex, NikishinPair, _points, mop_bundle
from .orthopoly import VaryingMeasure, monic_orthogonal, orthonormal_eval
from .precision import PrecisionConfig
from .quadrature import log_equilibrium_integral
from .szego import szego_function
from .tn_operator import c_from_kappa_ratios, kappa_ratios
from .weights import Interval, JacobiEdge, MeasureSpec, WeightExpr

QUANTITIES = (
    "Qratio1", "Qratio2",
    "PsiRatio1", "PsiRatio2",
    "kappaRatio1", "kappaRatio2",
    "Kratio1", "Kratio2",
    "cConst1", "cConst2",
    "hLimit2", "hLimit3",
)
SCALAR_QUANTITIES = ("kappaRatio1", "kappaRatio2", "Kratio1", "Kratio2", "cConst1", "cConst2")
# interval each function-valued quantity must avoid (1 = Delta1, 2 = Delta2)
HOST = {"Qratio1": 1, "PsiRatio1": 1, "hLimit2": 1, "Qratio2": 2, "PsiRatio2": 2, "hLimit3": 2}
SCALAR_POINT = complex(np.inf, 0.0)


@dataclass(frozen=True)
class RayFamily:
    """(m, m) for kind 'diag' or (m+1, m) for kind 'step', m in [m_lo, m_hi]."""

    kind: str
    m_lo: int
    m_hi: int

    def __post_init__(self):
        if self.kind not in ("diag", "step"):
            raise ValueError("ray kind must be 'diag' for (m,m) or 'step' for (m+1,m)")
        if self.m_lo < 0 or self.m_hi < self.m_lo:
            raise ValueError("invalid m range")

    def indices(self, max_size: int | None = None) -> List[MultiIndex]:
        out = []
        for m in range(self.m_lo, self.m_hi + 1):
            n = MultiIndex(m, m) if self.kind == "diag" else MultiIndex(m + 1, m)
            if max_size is None or n.size <= max_size:
                out.append(n)
        return out

    @property
    def label(self) -> str:
        return "(m,m)" if self.kind == "diag" else "(m+1,m)"


@dataclass(frozen=True, eq=False)
class ConvergenceRecord:
    index: MultiIndex
    quantity: str
    points: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.observed - self.predicted)

    @property
    def sup_error(self) -> float:
        return float(np.max(self.errors))

    def rows(self):
        """CSV rows: n1, n2, quantity, point, observed, predicted, abs_error."""
        for z, o, p, e in zip(self.points, self.observed, self.predicted, self.errors):
            yield (self.index.n1, self.index.n2, self.quantity, z.real, z.imag, o.real, o.imag, p.real, p.imag, e)


def test_points(sys: NikishinPair, host: int, count: int = 16) -> np.ndarray:
    """Ellipse around Delta_host at distance 0.5 plus the gap midpoint and +-10."""
    iv = sys.delta1 if host == 1 else sys.delta2
    pts = list(ellipse_contour(iv, count, offset=0.5))
    lo, hi = sorted((sys.delta1, sys.delta2), key=lambda I: I.a)
    extra = [0.5 * (lo.b + hi.a), -10.0 + min(lo.a, 0.0), 10.0 + max(hi.b, 0.0)]
    for x in extra:
        if min(abs(complex(x) - p) for p in pts) > 1e-9:
            pts.append(complex(x))
    return np.asarray(pts, dtype=complex)


def _c(b: MopBundle, vals) -> np.ndarray:
    return np.atleast_1d(b.arith.to_complex(vals))


def _ev(b: MopBundle, fn, z):
    zz, _ = _points(z, b.arith)
    return _c(b, fn(zz))


@lru_cache(maxsize=256)
def cached_bundle(sys: NikishinPair, n: MultiIndex, perturbed: bool) -> MopBundle:
    return mop_bundle(sys, n, perturbed)


@lru_cache(maxsize=32)
def cached_phi(sys: NikishinPair, tol: float = 1e-12) -> PhiResult:
    return solve_phi(sys.rho1, sys.rho2, sys.delta1, sys.delta2, tol)


def predicted_values(phi: PhiResult, quantity: str, z: np.ndarray, sys: NikishinPair) -> np.ndarray:
    """Limit of each tracked quantity according to the fixed point Phi."""
    F1, F2 = phi.at_infinity(1), phi.at_infinity(2)
    if quantity == "Qratio1":
        return phi(1, z) / F1
    if quantity == "Qratio2":
        return phi(2, z) / F2
    if quantity == "PsiRatio1":
        return phi(2, z) / (F1 * phi(1, z))
    if quantity == "PsiRatio2":
        return 1.0 / (F1 * phi(2, z))
    if quantity in ("kappaRatio1", "Kratio1"):
        return np.array([F1 / np.sqrt(F2)], dtype=complex)
    if quantity == "kappaRatio2":
        return np.array([F2 / np.sqrt(F1)], dtype=complex)
    if quantity == "Kratio2":
        return np.array([np.sqrt(F1 * F2)], dtype=complex)
    if quantity == "cConst1":
        return np.array([F1], dtype=complex)
    if quantity == "cConst2":
        return np.array([F2], dtype=complex)
    if quantity in ("hLimit2", "hLimit3"):
        iv = sys.delta1 if quantity == "hLimit2" else sys.delta2
        return 1.0 / interval_sqrt(z, iv.a, iv.b)
    raise ValueError(f"unknown quantity {quantity!r}")


def observed_values(pert: MopBundle, base: MopBundle, quantity: str, z: np.ndarray) -> np.ndarray:
    if quantity in ("Qratio1", "Qratio2"):
        k = int(quantity[-1])
        P, Q = (pert.Q1, base.Q1) if k == 1 else (pert.Q2, base.Q2)
        return _ev(pert, P, z) / _ev(base, Q, z)
    if quantity in ("PsiRatio1", "PsiRatio2"):
        k = int(quantity[-1])
        return _ev(pert, lambda t: pert.psi(k, t), z) / _ev(base, lambda t: base.psi(k, t), z)
    kr = kappa_ratios(pert, base)
    if quantity in ("kappaRatio1", "kappaRatio2"):
        return np.array([kr[int(quantity[-1]) - 1]], dtype=complex)
    if quantity in ("Kratio1", "Kratio2"):
        k = int(quantity[-1])
        return np.array([pert.K_float[k - 1] / base.K_float[k - 1]], dtype=complex)
    if quantity in ("cConst1", "cConst2"):
        return np.array([c_from_kappa_ratios(*kr)[int(quantity[-1]) - 1]], dtype=complex)
    if quantity in ("hLimit2", "hLimit3"):
        k = int(quantity[-1])
        return pert.eps[k - 2] * _ev(pert, lambda t: pert.h(k, t), z)
    raise ValueError(f"unknown quantity {quantity!r}")


def exact_values(pert: MopBundle, base: MopBundle, quantity: str, z: np.ndarray, c1: float, c2: float):
    """Closed forms for constant perturbations rho = (c1, c2), valid at every index."""
    kr = (c1 ** -0.5, c2 ** -0.5)
    one = np.ones(len(z), dtype=complex)
    table = {
        "Qratio1": one, "Qratio2": one,
        "PsiRatio1": c1 * one, "PsiRatio2": c1 * c2 * one,
        "kappaRatio1": [kr[0]], "kappaRatio2": [kr[1]],
        "Kratio1": [c1 ** -0.5], "Kratio2": [(c1 * c2) ** -0.5],
        "cConst1": [c_from_kappa_ratios(*kr)[0]], "cConst2": [c_from_kappa_ratios(*kr)[1]],
    }
    if quantity in table:
        return np.asarray(table[quantity], dtype=complex)
    # h-functions are invariant under constant rescaling of the measures
    k = int(quantity[-1])
    return base.eps[k - 2] * _ev(base, lambda t: base.h(k, t), z)


def points_for(sys: NikishinPair, quantity: str, count: int = 16) -> np.ndarray:
    if quantity in SCALAR_QUANTITIES:
        return np.array([SCALAR_POINT])
    return test_points(sys, HOST[quantity], count)


def index_records(sys: NikishinPair, n: MultiIndex, quantities: Sequence[str] = QUANTITIES,
                  phi: PhiResult | None = None, exact_constants=None,
                  points: Dict[str, np.ndarray] | None = None, provider=None) -> List[ConvergenceRecord]:
    """Records of every requested quantity at one index.

    With ``exact_constants=(c1, c2)`` predictions are the constant-weight
    closed forms instead of the Phi limits.  ``provider(sys, n, perturbed)``
    supplies bundles (default: an in-memory cache).
    """
    provider = provider or cached_bundle
    pert = provider(sys, n, True)
    base = provider(sys, n, False)
    if exact_constants is None and phi is None:
        phi = cached_phi(sys)
    out = []
    for q in quantities:
        z = points[q] if points and q in points else points_for(sys, q)
        obs = observed_values(pert, base, q, z)
        if exact_constants is not None:
            pred = exact_values(pert, base, q, z, *exact_constants)
        else:
            pred = predicted_values(phi, q, z, sys)
        out.append(ConvergenceRecord(n, q, z, obs, np.asarray(pred, dtype=complex)))
    return out


def ray_records(sys: NikishinPair, ray: RayFamily, quantities: Sequence[str] = QUANTITIES,
                max_size: int | None = None, exact_constants=None, phi: PhiResult | None = None,
                provider=None) -> List[ConvergenceRecord]:
    """All records along a ray, ordered by index then by quantity tag order."""
    out = []
    for n in ray.indices(max_size):
        out.extend(index_records(sys, n, quantities, phi=phi, exact_constants=exact_constants,
                                 provider=provider))
    return out


def ratio_table(sys: NikishinPair, ray: RayFamily, quantity: str, test_points=None,
                max_size: int | None = None, phi: PhiResult | None = None,
                provider=None) -> List[ConvergenceRecord]:
    """Records of one quantity along a ray."""
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    pts = None if test_points is None else {quantity: np.asarray(test_points, dtype=complex)}
    return [index_records(sys, n, (quantity,), phi=phi, points=pts, provider=provider)[0]
            for n in ray.indices(max_size)]


def constant_perturbation(sys: NikishinPair):
    """(c1, c2) when both perturbations are constants (None counts as 1), else None."""
    vals = []
    for rho in (sys.rho1, sys.rho2):
        if rho is None:
            vals.append(1.0)
            continue
        c = rho.constant_value()
        if c is None:
            return None
        vals.append(c)
    return tuple(vals)


# ---------------------------------------------------------------------------
# scalar baselines on [-1, 1]


def chebyshev_orthonormal(n: int, z):
    """t_0 = 1/sqrt(pi), t_n = sqrt(2/pi) T_n."""
    z = np.asarray(z, dtype=complex)
    if n == 0:
        return np.full(z.shape, 1 / np.sqrt(np.pi), dtype=complex)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    return np.sqrt(2 / np.pi) * C.chebval(z, c)


def _orthonormal(mu: MeasureSpec, n: int, z, extra=None):
    cfg = PrecisionConfig.for_degree(n, 53)
    r = monic_orthogonal(VaryingMeasure(mu, extra), n, cfg)
    return orthonormal_eval(r, np.asarray(z, dtype=complex))


def szego_baseline(mu: MeasureSpec, n_range: Iterable[int], test_points,
                   tag: str = "SzegoRatio") -> List[ConvergenceRecord]:
    """p_n / t_n against S_mu = G(sqrt(1-x^2) mu')."""
    if mu.interval != Interval(-1.0, 1.0):
        raise ValueError("the Szegő baseline lives on [-1, 1]")
    if not np.isfinite(log_equilibrium_integral(mu.weight, mu.interval)):
        raise ValueError("measure violates the Szegő condition")
    z = np.atleast_1d(np.asarray(test_points, dtype=complex))
    S = szego_function(mu.interval, mu.weight * WeightExpr((JacobiEdge(0.5, 0.5),)))
    pred = S(z)
    out = []
    for n in n_range:
        obs = _orthonormal(mu, n, z) / chebyshev_orthonormal(n, z)
        out.append(ConvergenceRecord(MultiIndex(n, 0), tag, z, obs, pred))
    return out


def mnt_baseline(mu: MeasureSpec, g: WeightExpr, n_range: Iterable[int], test_points,
                 tag: str = "MNTRatio") -> List[ConvergenceRecord]:
    """p~_n / p_n for the measures g dmu and mu against S_g = G(g)."""
    z = np.atleast_1d(np.asarray(test_points, dtype=complex))
    S = szego_function(mu.interval, g)
    pred = S(z)
    mu_g = mu.perturbed(g)
    out = []
    for n in n_range:
        obs = _orthonormal(mu_g, n, z) / _orthonormal(mu, n, z)
        out.append(ConvergenceRecord(MultiIndex(n, 0), tag, z, obs, pred))
    return out
