"""Fixed test contours around an interval."""
from __future__ import annotations

import numpy as np

from .weights import Interval


def ellipse_contour(interval: Interval, count: int = 16, offset: float = 0.5, phase: float = 0.0) -> np.ndarray:
    """Points on the ellipse with foci at the endpoints passing ``offset`` beyond them."""
    a = interval.half + offset
    b = np.sqrt(a * a - interval.half**2)
    t = 2 * np.pi * (np.arange(count) + phase) / count
    return interval.mid + a * np.cos(t) + 1j * b * np.sin(t)
