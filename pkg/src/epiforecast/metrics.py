"""Forecast accuracy metrics and their multi-day extensions.

All metrics are percentages returned as plain floats.

* ``mape``: mean absolute percentage error, (100/n) * sum |xhat_i - x_i| / |x_i|.
* ``mdsa``: median symmetric accuracy, 100 * (exp(median |ln(xhat_j / x_j)|) - 1).
  Symmetric under swapping actuals and predictions and robust to outliers.

For forecasts that run k days ahead over P windows, the k-period lift of a
base metric scores each step across the P windows, then averages over the k
steps.  With k = 1 it reduces to the base metric exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class LengthMismatch(ValueError):
    """Actuals and predictions differ in length."""


class ZeroActual(ValueError):
    """An actual value is zero, so a relative error is undefined."""


class NonPositiveValue(ValueError):
    """A value is outside the strictly positive domain of the log ratio."""


MetricFn = Callable[[np.ndarray, np.ndarray], float]


def _paired(actuals, predictions) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actuals, dtype=float)
    p = np.asarray(predictions, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {p.shape} do not pair up")
    if a.size == 0:
        raise LengthMismatch("need at least one value")
    return a, p


def mape(actuals, predictions) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _paired(actuals, predictions)
    if np.any(a == 0.0):
        raise ZeroActual("actuals must be non-zero")
    return float(100.0 / a.size * np.sum(np.abs(p - a) / np.abs(a)))


def mdsa(actuals, predictions) -> float:
    """Median symmetric accuracy, in percent.

    The median of an even number of log ratios is the mean of the two
    central order statistics.
    """
    a, p = _paired(actuals, predictions)
    if np.any(a <= 0.0) or np.any(p <= 0.0):
        raise NonPositiveValue("all values must be strictly positive")
    med = float(np.median(np.abs(np.log(p / a))))
    return 100.0 * (math.exp(med) - 1.0)


@dataclass(frozen=True, eq=False)
class HorizonPredictions:
    """P forecast windows run k days ahead, paired with the true values.

    ``actuals[p, i]`` is the true value i+1 days after window p's end and
    ``predictions[p, i]`` the corresponding forecast.
    """

    actuals: np.ndarray
    predictions: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.actuals, dtype=float)
        p = np.asarray(self.predictions, dtype=float)
        if a.ndim != 2 or a.shape != p.shape:
            raise ValueError(f"need matching P x k matrices, got {a.shape} and {p.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("need at least one sequence and one step")
        if np.any(a <= 0.0):
            raise NonPositiveValue("actuals must be strictly positive")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
            raise ValueError("values must be finite")
        object.__setattr__(self, "actuals", a)
        object.__setattr__(self, "predictions", p)

    @property
    def n_sequences(self) -> int:
        return self.actuals.shape[0]

    @property
    def horizon(self) -> int:
        return self.actuals.shape[1]


def k_period_metric(data: HorizonPredictions, base: MetricFn) -> float:
    """Average of ``base`` applied across sequences at each step 1..k.

    Step i scores the P actuals against the P predictions for that day;
    the k per-step scores are then averaged.
    """
    total = 0.0
    for i in range(data.horizon):
        total += base(data.actuals[:, i], data.predictions[:, i])
    return total / data.horizon


def kmape(data: HorizonPredictions) -> float:
    """k-period MAPE: per-step MAPE across sequences, averaged over steps."""
    return k_period_metric(data, mape)


def kmdsa(data: HorizonPredictions) -> float:
    """k-period MdSA: per-step MdSA across sequences, averaged over steps."""
    return k_period_metric(data, mdsa)
