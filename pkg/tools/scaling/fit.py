"""Power-law regression in log-log space."""

from __future__ import annotations

import logging

import numpy as np
from scipy.stats import linregress

from errors import DegenerateAbscissa, InsufficientPoints, NonPositiveData

from .base import MIN_POINTS, FitResult

logger = logging.getLogger("qwd")


def _arrays(points) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(float(x), float(y)) for x, y in points]
    if len(pairs) < MIN_POINTS:
        raise InsufficientPoints(
            f"scaling: need >= {MIN_POINTS} points for a fit, got {len(pairs)}"
        )
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonPositiveData("scaling: non-finite data in fit")
    if np.any(x <= 0) or np.any(y <= 0):
        bad = int(np.count_nonzero((x <= 0) | (y <= 0)))
        raise NonPositiveData(f"scaling: {bad} non-positive points in log-log fit")
    if np.all(x == x[0]):
        raise DegenerateAbscissa(f"scaling: every abscissa equals {x[0]!r}")
    return x, y


def fit_power_law(points) -> FitResult:
    x, y = _arrays(points)
    fit = linregress(np.log(x), np.log(y))
    return FitResult(
        exponent=float(fit.slope),
        amplitude=float(np.exp(fit.intercept)),
        stderr=float(fit.stderr),
        r_squared=min(1.0, max(0.0, float(fit.rvalue) ** 2)),
        window=(float(x.min()), float(x.max())),
        n_points=len(x),
    )


def fit_with_offset(points, iterations: int = 2) -> FitResult:
    """y ~ offset + A x**p: fit, pin the offset at the smallest x, refit.

    The offset is chosen so the fitted power law passes through the point
    with the smallest abscissa; converges quickly when p < 1.
    """
    x, y = _arrays(points)
    anchor = int(np.argmin(x))
    offset = 0.0
    fit = fit_power_law(zip(x, y))
    for step in range(iterations):
        offset = float(y[anchor] - fit.amplitude * x[anchor] ** fit.exponent)
        fit = fit_power_law(zip(x, y - offset))
        logger.debug(
            "offset fit step %d: offset=%.6g exponent=%.6f", step, offset, fit.exponent
        )
    return FitResult(
        exponent=fit.exponent,
        amplitude=fit.amplitude,
        stderr=fit.stderr,
        r_squared=fit.r_squared,
        window=fit.window,
        n_points=fit.n_points,
        offset=offset,
    )
