"""Minimum-slope linear expansion function over a variation scatter."""

from collections.abc import Iterable

import numpy as np

from atvr.core.errors import DegenerateInputError, InvalidInputError
from atvr.core.types import ExpansionFit

DEFAULT_ZERO_TOL = 1e-8


def fit_min_slope(points: Iterable[tuple[float, float]], zero_tol: float = DEFAULT_ZERO_TOL) -> ExpansionFit:
    """
    Smallest k >= 1 with k * x >= y for every (source, target) variation pair.

    Points with source variation x <= zero_tol are dropped and counted.
    tight_index is the first point attaining the slope, or None when the
    slope is clamped to 1.

    Raises:
        DegenerateInputError: If every point is dropped
    """
    pts = [(float(x), float(y)) for x, y in points]
    if any(not (np.isfinite(x) and np.isfinite(y)) for x, y in pts):
        raise InvalidInputError("Scatter points must be finite")
    kept = [i for i, (x, _) in enumerate(pts) if x > zero_tol]
    if not kept:
        raise DegenerateInputError(
            "No point has source variation above the zero threshold",
            {"points": len(pts), "zero_tol": zero_tol},
        )
    ratios = np.array([pts[i][1] / pts[i][0] for i in kept])
    best = int(np.argmax(ratios))
    slope = float(ratios[best])
    tight: int | None = kept[best]
    if slope < 1.0:
        slope, tight = 1.0, None
    return ExpansionFit(slope=slope, points=pts, excluded_count=len(pts) - len(kept), tight_index=tight)
