"""Reader for the wide-format global confirmed-cases CSV.

Expected layout: a header ``Province/State,Country/Region,Lat,Long`` followed
by one column per day in M/D/YY form, and one row per country or per
province.  All rows of a country are summed; missing calendar days are an
error, never interpolated.
"""

from __future__ import annotations

import csv
import datetime as dt

from numpy import zeros

from .series import TimeSeries

EXPECTED_HEADER = ("Province/State", "Country/Region", "Lat", "Long")


class CountryNotFound(ValueError):
    """No row matches the requested Country/Region value."""


class MalformedHeader(ValueError):
    """Header columns are not the expected names followed by daily dates."""


class NonNumericCell(ValueError):
    """A count cell could not be parsed as a number."""


def parse_jhu_csv(path, country: str, cutoff_date: dt.date) -> TimeSeries:
    """Sum all rows of ``country`` and drop columns after ``cutoff_date``.

    Country matching is exact.  Returns the raw (untruncated) series.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 5:
        raise MalformedHeader(f"{path}: too few columns")
    header = rows[0]
    if tuple(header[:4]) != EXPECTED_HEADER:
        raise MalformedHeader(f"{path}: header starts {header[:4]}, expected {EXPECTED_HEADER}")
    dates = []
    for label in header[4:]:
        try:
            dates.append(dt.datetime.strptime(label.strip(), "%m/%d/%y").date())
        except ValueError as exc:
            raise MalformedHeader(f"{path}: date column {label!r} is not M/D/YY") from exc
    for prev, cur in zip(dates, dates[1:]):
        if (cur - prev).days != 1:
            raise MalformedHeader(f"{path}: date columns jump from {prev} to {cur}")
    kept = [idx for idx, date in enumerate(dates) if date <= cutoff_date]
    if not kept:
        raise ValueError(f"cutoff {cutoff_date} precedes the first data column {dates[0]}")

    totals = zeros(len(kept))
    matched = False
    for row in rows[1:]:
        if len(row) < 2 or row[1] != country:
            continue
        matched = True
        if len(row) != len(header):
            raise MalformedHeader(f"{path}: row for {country!r} has {len(row)} cells")
        for out_idx, col_idx in enumerate(kept):
            cell = row[4 + col_idx]
            try:
                totals[out_idx] += float(cell)
            except ValueError as exc:
                raise NonNumericCell(
                    f"{path}: {country!r} has non-numeric cell {cell!r} on {dates[col_idx]}"
                ) from exc
    if not matched:
        raise CountryNotFound(f"{path}: no row with Country/Region == {country!r}")
    return TimeSeries(region_id=country, start_date=dates[kept[0]], values=totals)
