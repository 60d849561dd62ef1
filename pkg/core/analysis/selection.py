from math import fsum
from typing import Mapping, Sequence

import numpy as np

from core.components import Analysis
from core.errors import MetricError


def normalize_series(series: Sequence[float]) -> np.ndarray:
    """(s - min) / (Q3 - min); all zeros when the upper quartile equals the minimum."""
    values: np.ndarray = np.asarray(series, dtype=np.float64)

    if values.size == 0:
        raise MetricError("cannot normalise an empty series")

    low: float = float(values.min())
    q3: float = float(np.quantile(values, 0.75, method="linear"))

    if q3 == low:
        return np.zeros_like(values)

    return np.clip((values - low) / (q3 - low), 0, None)


def moving_average(series: Sequence[float], window: int = Analysis.SMOOTHING_WINDOW) -> np.ndarray:
    """Centred mean; near the ends the window shrinks symmetrically to stay centred."""
    if window < 1 or window % 2 == 0:
        raise MetricError(f"moving-average window must be a positive odd number, got {window}")

    values: np.ndarray = np.asarray(series, dtype=np.float64)
    n: int = len(values)
    half: int = window // 2
    smoothed: np.ndarray = np.empty(n)

    for i in range(n):
        h: int = min(half, i, n - 1 - i)
        smoothed[i] = fsum(values[i - h:i + h + 1]) / (2 * h + 1)

    return smoothed


def selection_scores(series: Mapping[str, Sequence[float]], window: int = Analysis.SMOOTHING_WINDOW) -> np.ndarray:
    if not series:
        raise MetricError("checkpoint selection needs at least one kernel series")

    lengths: set[int] = {len(s) for s in series.values()}

    if len(lengths) != 1 or 0 in lengths:
        raise MetricError(f"kernel series must be non-empty and of equal length, got lengths {sorted(lengths)}")

    normalized: list[np.ndarray] = [normalize_series(series[kernel]) for kernel in sorted(series)]
    averaged: np.ndarray = np.array([fsum(column) / len(normalized) for column in zip(*normalized)])
    return moving_average(averaged, window)


def select_checkpoint(series: Mapping[str, Sequence[float]], window: int = Analysis.SMOOTHING_WINDOW) -> int:
    """Index of the checkpoint with the lowest smoothed, normalised MMD; ties go to the earliest."""
    return int(np.argmin(selection_scores(series, window)))
