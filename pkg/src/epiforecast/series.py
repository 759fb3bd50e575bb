"""Daily cumulative case-count series: truncation, windowing, chronological splits.

A series is a contiguous run of daily values anchored to a calendar date.
Supervised samples are sliding windows of ``n_s`` inputs followed by ``n_p``
target values; splits are strictly chronological (train, then validation,
then test) so that no future information leaks into earlier partitions.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

VALIDATION_SIZE = 10
TEST_SIZE = 10


class EmptyAfterTruncation(ValueError):
    """No value in the series reaches the truncation threshold."""


class SeriesTooShort(ValueError):
    """Series has too few points for the requested operation."""


class TooFewSamples(ValueError):
    """Not enough window samples to carve out validation and test sets."""


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One region's daily cumulative counts, anchored at ``start_date``.

    ``values[i]`` is the count on ``start_date + i`` days; the frequency is
    fixed at one day, so the series length equals the number of calendar
    days covered.
    """

    region_id: str
    start_date: dt.date
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if np.any(self.values < 0):
            raise ValueError("values must be non-negative")

    def __len__(self) -> int:
        return int(self.values.size)

    def date_of(self, index: int) -> dt.date:
        return self.start_date + dt.timedelta(days=int(index))


@dataclass(frozen=True, eq=False)
class WindowSample:
    """A length-``n_s`` input window and its ``n_p`` future target values.

    ``window_end_index`` is the position of the last input value in the
    source series, so samples order chronologically by it.
    """

    inputs: np.ndarray
    targets: np.ndarray
    window_end_index: int

    def __post_init__(self):
        object.__setattr__(self, "inputs", _readonly(self.inputs))
        object.__setattr__(self, "targets", _readonly(self.targets))
        if self.inputs.size < 1 or self.targets.size < 1:
            raise ValueError("inputs and targets must be non-empty")


@dataclass(frozen=True, eq=False)
class SupervisedSplit:
    """Chronological train/validation/test partition of window samples."""

    train: list[WindowSample]
    validation: list[WindowSample]
    test: list[WindowSample]


def truncate_below_threshold(series: TimeSeries, threshold: float) -> TimeSeries:
    """Drop the leading points before the first value >= ``threshold``.

    Only the beginning is trimmed: later dips below the threshold (data
    corrections in cumulative feeds) are kept verbatim.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    qualifying = np.nonzero(series.values >= threshold)[0]
    if qualifying.size == 0:
        raise EmptyAfterTruncation(
            f"no value in {series.region_id!r} reaches threshold {threshold}"
        )
    first = int(qualifying[0])
    return TimeSeries(
        region_id=series.region_id,
        start_date=series.date_of(first),
        values=series.values[first:],
    )


def window_array(values: np.ndarray, n_s: int, n_p: int) -> list[WindowSample]:
    """Sliding windows over a raw value array; stride 1, inputs then targets adjacent."""
    values = np.asarray(values, dtype=float)
    if n_s < 1 or n_p < 1:
        raise ValueError("n_s and n_p must be at least 1")
    n = values.size
    if n < n_s + n_p:
        raise SeriesTooShort(
            f"need at least {n_s + n_p} points for n_s={n_s}, n_p={n_p}, got {n}"
        )
    samples = []
    for j in range(n - n_s - n_p + 1):
        samples.append(
            WindowSample(
                inputs=values[j : j + n_s],
                targets=values[j + n_s : j + n_s + n_p],
                window_end_index=j + n_s - 1,
            )
        )
    return samples


def make_windows(series: TimeSeries, n_s: int, n_p: int) -> list[WindowSample]:
    """All length-``n_s`` windows of ``series`` with ``n_p``-step targets."""
    return window_array(series.values, n_s, n_p)


def split_train_val_test(samples: list[WindowSample]) -> SupervisedSplit:
    """Chronological split: last 10 windows test, preceding 10 validation, rest train."""
    n_d = len(samples)
    if n_d <= VALIDATION_SIZE + TEST_SIZE:
        raise TooFewSamples(
            f"need more than {VALIDATION_SIZE + TEST_SIZE} samples, got {n_d}"
        )
    ordered = sorted(samples, key=lambda s: s.window_end_index)
    return SupervisedSplit(
        train=ordered[: n_d - VALIDATION_SIZE - TEST_SIZE],
        validation=ordered[n_d - VALIDATION_SIZE - TEST_SIZE : n_d - TEST_SIZE],
        test=ordered[n_d - TEST_SIZE :],
    )
