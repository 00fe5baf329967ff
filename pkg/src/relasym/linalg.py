"""Dense solves that work on float64 and mpmath object arrays alike."""
from __future__ import annotations

import numpy as np

from .errors import SingularGram


def _lu_full(A, tiny):
    """LU with complete pivoting; returns (LU, row perm, col perm)."""
    A = A.copy()
    n = A.shape[0]
    rows = np.arange(n)
    cols = np.arange(n)
    for k in range(n):
        sub = np.abs(A[k:, k:]).astype(float) if A.dtype == object else np.abs(A[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        if not sub[i - k, j - k] > tiny:
            raise SingularGram(f"pivot {float(sub[i - k, j - k]):.3g} at step {k} of {n}")
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            rows[[k, i]] = rows[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            cols[[k, j]] = cols[[j, k]]
        piv = A[k, k]
        if k + 1 < n:
            A[k + 1 :, k] = A[k + 1 :, k] / piv
            A[k + 1 :, k + 1 :] = A[k + 1 :, k + 1 :] - np.outer(A[k + 1 :, k], A[k, k + 1 :])
    return A, rows, cols


def _lu_apply(LU, rows, cols, b):
    n = LU.shape[0]
    y = b[rows].copy()
    for i in range(1, n):
        y[i] = y[i] - LU[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - LU[i, i + 1 :] @ y[i + 1 :]) / LU[i, i]
    x = y.copy()
    x[cols] = y
    return x


def solve(A, b, refine: int = 3, rel_tiny: float | None = None):
    """Solve ``A x = b`` by complete pivoting plus iterative refinement.

    Raises :class:`SingularGram` when a pivot falls below ``rel_tiny`` times
    the largest entry of ``A``.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    n = A.shape[0]
    if n == 0:
        return b.copy()
    scale = float(np.max(np.abs(A)))
    if not scale > 0:
        raise SingularGram("zero matrix")
    if rel_tiny is None:
        # numerically singular: pivot below one unit roundoff of the largest entry
        rel_tiny = 2.0**-52 if A.dtype != object else float(A.flat[0].context.eps)
    LU, rows, cols = _lu_full(A, rel_tiny * scale)
    x = _lu_apply(LU, rows, cols, b)
    for _ in range(refine):
        r = b - A @ x
        x = x + _lu_apply(LU, rows, cols, r)
    return x
