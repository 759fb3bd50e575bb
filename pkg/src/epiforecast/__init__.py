"""Daily epidemic case-count forecasting toolkit.

Recursive multi-day forecasts from five from-scratch recurrent
architectures and ARIMA, scored with k-day MAPE and k-day median symmetric
accuracy over sliding evaluation windows.
"""

__version__ = "0.1.0"

from .metrics import HorizonPredictions, k_period_metric, kmape, kmdsa, mape, mdsa
from .series import (
    SupervisedSplit,
    TimeSeries,
    WindowSample,
    make_windows,
    split_train_val_test,
    truncate_below_threshold,
)

__all__ = [
    "HorizonPredictions",
    "SupervisedSplit",
    "TimeSeries",
    "WindowSample",
    "__version__",
    "k_period_metric",
    "kmape",
    "kmdsa",
    "make_windows",
    "mape",
    "mdsa",
    "split_train_val_test",
    "truncate_below_threshold",
]
