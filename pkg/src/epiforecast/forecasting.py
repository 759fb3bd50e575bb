"""Recursive multi-day forecasting and test-set evaluation.

Any model that can predict the next value from a fixed-length window plugs
in through the ``Forecaster`` protocol.  Multi-day forecasts are produced
recursively: each prediction is appended to the window (oldest value
dropped) and fed back in for the next day.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .metrics import HorizonPredictions, kmape, kmdsa
from .series import WindowSample


class WindowLengthMismatch(ValueError):
    """Window length does not match the forecaster's expected n_s."""


@runtime_checkable
class Forecaster(Protocol):
    """One-step-ahead predictor over windows of ``n_s`` raw-scale values."""

    n_s: int

    def predict_next(self, window: np.ndarray) -> float: ...


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """The ``horizon`` recursive predictions made from one source window."""

    predictions: np.ndarray
    horizon: int
    source_window_end: int | None = None


def recursive_forecast(
    forecaster: Forecaster,
    window,
    n_p: int,
    source_window_end: int | None = None,
) -> ForecastResult:
    """Forecast ``n_p`` days ahead by feeding each prediction back in.

    Step 1 predicts from ``window``; every later step drops the oldest
    element and appends the previous prediction.
    """
    current = np.asarray(window, dtype=float).copy()
    if current.ndim != 1 or current.size != forecaster.n_s:
        raise WindowLengthMismatch(
            f"expected window of length {forecaster.n_s}, got shape {current.shape}"
        )
    if n_p < 1:
        raise ValueError("n_p must be at least 1")
    predictions = np.empty(n_p)
    for step in range(n_p):
        value = float(forecaster.predict_next(current))
        if not np.isfinite(value):
            raise ValueError(f"non-finite prediction at step {step + 1}")
        predictions[step] = value
        current = np.append(current[1:], value)
    return ForecastResult(predictions, n_p, source_window_end)


def collect_forecasts(
    forecaster: Forecaster, samples: Sequence[WindowSample], n_p: int
) -> HorizonPredictions:
    """Run the recursion over every sample with >= n_p targets and pair with truth."""
    usable = [s for s in samples if s.targets.size >= n_p]
    if not usable:
        raise ValueError(f"no sample has {n_p} target values")
    actuals = np.stack([s.targets[:n_p] for s in usable])
    predictions = np.stack(
        [
            recursive_forecast(forecaster, s.inputs, n_p, s.window_end_index).predictions
            for s in usable
        ]
    )
    return HorizonPredictions(actuals=actuals, predictions=predictions)


def evaluate(
    forecaster: Forecaster, test: Sequence[WindowSample], n_p: int
) -> tuple[float, float, HorizonPredictions]:
    """Score a forecaster on test windows: (kMAPE %, kMdSA %, raw forecasts)."""
    data = collect_forecasts(forecaster, test, n_p)
    return kmape(data), kmdsa(data), data
