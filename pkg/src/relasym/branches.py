"""Branches of sqrt((z-a)(z-b)) and the exterior conformal map of [-1, 1]."""
from __future__ import annotations

import numpy as np


def _csqrt(z, arith=None):
    if arith is not None and arith.is_mp:
        ctx = arith.ctx
        if np.ndim(z):
            return np.frompyfunc(lambda v: ctx.sqrt(ctx.mpc(v)), 1, 1)(z)
        return ctx.sqrt(ctx.mpc(z))
    return np.sqrt(np.asarray(z, dtype=complex))


def unit_sqrt(u, arith=None):
    """sqrt(u^2 - 1) analytic off [-1, 1] and positive for u > 1."""
    return _csqrt(u - 1, arith) * _csqrt(u + 1, arith)


def exterior_map(u, arith=None):
    """phi(u) = u + sqrt(u^2 - 1), mapping C minus [-1,1] onto |w| > 1."""
    return u + unit_sqrt(u, arith)


def interval_sqrt(z, a: float, b: float):
    """sqrt((z - a)(z - b)) positive for z > b, cut along [a, b]."""
    z = np.asarray(z, dtype=complex)
    return np.sqrt(z - b) * np.sqrt(z - a)
