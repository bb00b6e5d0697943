"""Map error and estimator-consistency measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GroundTruthMap


@dataclass
class ErrorSeries:
    time: np.ndarray
    total_abs_error: np.ndarray

    def __len__(self) -> int:
        return int(self.time.shape[0])


def _truth_values(means, truth) -> tuple[np.ndarray, np.ndarray]:
    means = np.asarray(means, dtype=float)
    values = truth.occupancy if isinstance(truth, GroundTruthMap) else np.asarray(truth, float)
    if means.shape != values.shape:
        raise ValueError(f"map of shape {means.shape} does not match truth {values.shape}")
    return means, values


def map_error(means, truth) -> float:
    means, values = _truth_values(means, truth)
    return float(np.abs(means - values).sum())


def inconsistency(means, variances, truth, sigmas: float = 2.0) -> float:
    """Total error mass lying outside the reported ``sigmas``-standard-deviation band."""
    means, values = _truth_values(means, truth)
    variances = np.asarray(variances, dtype=float)
    if np.any(variances < 0):
        raise ValueError("variances must be nonnegative")
    excess = np.abs(means - values) - sigmas * np.sqrt(variances)
    return float(np.maximum(excess, 0.0).sum())


def error_timeseries(log, truth) -> ErrorSeries:
    """Error after each logged snapshot; ``log`` yields ``(t, means)`` pairs."""
    times, errors = [], []
    for t, means in log:
        times.append(float(t))
        errors.append(map_error(means, truth))
    return ErrorSeries(np.array(times), np.array(errors))
