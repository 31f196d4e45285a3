"""Observed convergence rates.

Successive rates compare neighbouring refinement levels; the asymptotic rate
is the least-squares slope of log(error) against log(h) over the finest
levels. Both are computed here and nowhere else so that the rate reported in
a table and the slope written next to the plot data are the same number.
"""
import math
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from sipdg.utils.logging import get_logger

logger = get_logger(__name__)

# Errors at round-off level are floored so log() stays finite.
_ERROR_FLOOR = float(np.finfo(float).tiny)


def _safe_log(values: Sequence[float]) -> np.ndarray:
    return np.log(np.maximum(np.asarray(values, dtype=float), _ERROR_FLOOR))


def successive_rates(hs: Sequence[float], errors: Sequence[float]) -> list[Optional[float]]:
    """Rates log(e_{k-1}/e_k) / log(h_{k-1}/h_k) between neighbouring levels.

    With h halving between levels this is log2(e_{k-1}/e_k). The first entry
    is ``None``.

    Args:
        hs: Mesh sizes in level order
        errors: Errors in level order

    Returns:
        One rate per level, ``None`` for the first
    """
    if len(hs) != len(errors):
        raise ValueError("hs and errors must have the same length")
    log_h = _safe_log(hs)
    log_e = _safe_log(errors)
    rates: list[Optional[float]] = [None]
    for k in range(1, len(hs)):
        rates.append(float((log_e[k - 1] - log_e[k]) / (log_h[k - 1] - log_h[k])))
    return rates


def asymptotic_rate(hs: Sequence[float], errors: Sequence[float], last: int = 3) -> float:
    """Least-squares slope of log(error) versus log(h) over the last ``last`` levels.

    Args:
        hs: Mesh sizes in level order
        errors: Errors in level order
        last: Number of finest levels entering the fit

    Returns:
        The fitted slope (the observed order of convergence)
    """
    if len(hs) != len(errors):
        raise ValueError("hs and errors must have the same length")
    if last < 2 or len(hs) < last:
        raise ValueError(f"Need at least {max(last, 2)} levels to fit a rate, got {len(hs)}")

    fit = stats.linregress(_safe_log(hs[-last:]), _safe_log(errors[-last:]))
    slope = float(fit.slope)
    if not math.isfinite(slope):
        logger.warning("Non-finite convergence rate", context={"errors": list(errors[-last:])})
    return slope
