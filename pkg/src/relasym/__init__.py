"""Multiple orthogonal polynomials of Nikishin systems of two measures and
their relative asymptotics under perturbation of the generating measures."""
from .asymptotics import (
    QUANTITIES,
    ConvergenceRecord,
    RayFamily,
    mnt_baseline,
    ratio_table,
    ray_records,
    szego_baseline,
)
from .errors import RelAsymError
from .fixedpoint import GridFnPair, PhiResult, apply_T, metric_d, solve_phi
from .nikishin import MopBundle, MultiIndex, NikishinPair, default_system, mop_bundle, mop_Q, second_kind
from .orthopoly import VaryingMeasure, monic_orthogonal
from .precision import PrecisionConfig
from .szego import GridFunction, SzegoFn, szego_function
from .tn_operator import PolyPair, apply_Tn, apply_Ttilde, verify_fixed_point
from .weights import (
    AbsPolyFactor,
    Constant,
    ExpPoly,
    Interval,
    JacobiEdge,
    MeasureSpec,
    RationalPositive,
    WeightExpr,
    weight,
)

__version__ = "0.1.0"
