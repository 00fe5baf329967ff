"""Simple real zeros of a function on an interval: sign scanning plus polish."""
from __future__ import annotations

import numpy as np

from .errors import RootCountMismatch
from .precision import PrecisionConfig
from .weights import Interval

MAX_PANELS = 2**16


def _lobatto(interval: Interval, m: int, arith):
    # Chebyshev-Lobatto points, increasing; dense near the endpoints
    t = -np.cos(np.pi * np.arange(m + 1) / m)
    t[0], t[-1] = -1.0, 1.0
    return interval.from_unit(arith.real(t), arith)


def _sign_changes(vals):
    s = np.sign(vals)
    return [i for i in range(len(s) - 1) if s[i] == 0 or s[i] * s[i + 1] < 0]


def _illinois(f1, lo, hi, flo, fhi, xtol, maxit=200):
    """Illinois-modified regula falsi on a bracket [lo, hi]."""
    side = 0
    x = lo
    for _ in range(maxit):
        if hi - lo <= xtol:
            break
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < x < hi):
            x = (lo + hi) / 2
        fx = f1(x)
        if fx == 0:
            return x, fx
        if (fx > 0) == (fhi > 0):
            hi, fhi = x, fx
            if side == 1:
                flo = flo / 2
            side = 1
        else:
            lo, flo = x, fx
            if side == -1:
                fhi = fhi / 2
            side = -1
    x = (lo + hi) / 2
    return x, f1(x)


def roots_in_interval(f, interval: Interval, expected: int, cfg: PrecisionConfig | None = None):
    """Exactly ``expected`` simple zeros of a real function on ``interval``.

    ``f`` maps an array of abscissae (working precision) to real values.  The
    scan starts at ``8*expected + 64`` panels and doubles until three
    consecutive counts agree; a count different from ``expected`` at that point
    (or at the panel cap) raises :class:`RootCountMismatch`.
    """
    cfg = cfg or PrecisionConfig()
    arith = cfg.arith
    if expected < 0:
        raise ValueError("expected must be >= 0")
    m = 8 * expected + 64
    counts = []
    while True:
        xs = _lobatto(interval, m, arith)
        vals = np.asarray(f(xs))
        idx = _sign_changes(vals)
        counts.append(len(idx))
        stable = len(counts) >= 3 and counts[-1] == counts[-2] == counts[-3]
        if stable or m >= MAX_PANELS:
            break
        m *= 2
    if counts[-1] != expected:
        raise RootCountMismatch(counts[-1], expected)

    def f1(x):
        return f(np.array([x], dtype=object if arith.is_mp else float))[0]

    xtol = min(cfg.root_tol, 2.0 ** (-arith.bits + 3)) * interval.length
    roots = []
    for i in idx:
        lo, hi = xs[i], xs[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0:
            roots.append(lo)
            continue
        r, _ = _illinois(f1, lo, hi, flo, fhi, xtol)
        roots.append(r)
    return roots
