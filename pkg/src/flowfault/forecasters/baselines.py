"""Naive and Hard Subtraction one-step-ahead forecasters, plus lag estimation."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..core import SeriesPair
from ..errors import EmptyHistory, OutOfRange, SeriesTooShort


def naive_forecast(history: Sequence[float]) -> float:
    """Predict ``y(t+1) = y(t)``: the last value of ``history``."""
    if len(history) == 0:
        raise EmptyHistory("naive forecast needs at least one past value")
    return float(history[-1])


def hard_subtraction_forecast(pair: SeriesPair, t: int, lag_m: int) -> float:
    """Forecast ``g(t+1)`` as the lag-aligned leading sample ``c(t + 1 - lag_m)``.

    With ``lag_m == 0`` this reads ``c(t+1)``, the same-tick sample of the
    upstream sensor.
    """
    if lag_m < 0:
        raise ValueError("lag_m must be >= 0")
    source = t + 1 - lag_m
    if not pair.start <= source < pair.stop:
        raise OutOfRange(f"c({source}) is outside the series [{pair.start}, {pair.stop - 1}]")
    return float(pair.c[source - pair.start])


def lagged_correlation(c: np.ndarray, g: np.ndarray, lag: int) -> float:
    """Pearson correlation between ``c(t - lag)`` and ``g(t)``; NaN if degenerate."""
    x = c[: c.size - lag]
    y = g[lag:]
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    if denom == 0.0:
        return float("nan")
    return float(np.dot(xc, yc) / denom)


def estimate_lag(pair: SeriesPair, max_lag: int) -> int:
    """Lag in ``[0, max_lag]`` maximizing the C-to-G cross-correlation.

    Ties go to the smallest lag; degenerate (zero-variance) lags never win.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if len(pair) <= 2 * max_lag:
        raise SeriesTooShort(f"series of length {len(pair)} too short for max_lag={max_lag}")
    best_lag, best = 0, -np.inf
    for lag in range(max_lag + 1):
        r = lagged_correlation(pair.c, pair.g, lag)
        if r > best:
            best_lag, best = lag, r
    return best_lag
