"""Static SVG line charts of forecasts against the ground truth.

The emitted file is plain SVG: one polyline for the truth tail and one per
model, each carrying its plotted numbers in a ``data-values`` attribute so
the chart stays machine-checkable.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

from .forecasting import ForecastResult
from .series import TimeSeries

WIDTH = 840
HEIGHT = 480
MARGIN = 56
PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
)
TRUTH_COLOR = "#333333"


def _scale(value, lo, hi, out_lo, out_hi):
    if hi == lo:
        return (out_lo + out_hi) / 2.0
    return out_lo + (value - lo) / (hi - lo) * (out_hi - out_lo)


def _polyline(xs, ys, color, attrs=""):
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
        f'points="{points}"{attrs}/>'
    )


def emit_plot(
    series: TimeSeries,
    results: dict[str, ForecastResult],
    path,
    context: int = 20,
) -> None:
    """Write an SVG comparing each model's forecast with the truth tail.

    Each forecast is placed on the day axis by its ``source_window_end``;
    the truth line covers ``context`` days before the earliest forecast
    through the end of the series.
    """
    if not results:
        raise ValueError("at least one forecast is required")
    for name, result in results.items():
        if result.source_window_end is None:
            raise ValueError(f"forecast {name!r} has no source_window_end to place it")

    first_day = min(r.source_window_end + 1 for r in results.values())
    last_day = max(r.source_window_end + r.horizon for r in results.values())
    last_day = max(last_day, len(series) - 1)
    start = max(0, first_day - context)

    day_range = (start, last_day)
    values = [float(v) for v in series.values[start : last_day + 1]]
    all_values = list(values)
    for result in results.values():
        all_values.extend(float(v) for v in result.predictions)
    lo, hi = min(all_values), max(all_values)
    pad = 0.05 * (hi - lo) if hi > lo else max(1.0, abs(hi) * 0.05)
    lo, hi = lo - pad, hi + pad

    def x_of(day):
        return _scale(day, day_range[0], day_range[1], MARGIN, WIDTH - MARGIN)

    def y_of(value):
        return _scale(value, lo, hi, HEIGHT - MARGIN, MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="#999"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" '
        f'stroke="#999"/>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 18}" font-size="11">'
        f"{escape(series.date_of(start).isoformat())}</text>",
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 18}" font-size="11" '
        f'text-anchor="end">{escape(series.date_of(last_day).isoformat())}</text>',
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN}" font-size="11" '
        f'text-anchor="end">{lo:.6g}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" font-size="11" text-anchor="end">{hi:.6g}</text>',
        f'<text x="{WIDTH / 2:.0f}" y="24" font-size="14" text-anchor="middle">'
        f"{escape(series.region_id)}: forecasts vs ground truth</text>",
    ]

    truth_days = range(start, last_day + 1)
    truth_attr = f" data-series=\"truth\" data-values={quoteattr(','.join(repr(v) for v in values))}"
    parts.append(
        _polyline([x_of(d) for d in truth_days], [y_of(v) for v in values], TRUTH_COLOR, truth_attr)
    )

    legend_y = MARGIN
    for idx, (name, result) in enumerate(sorted(results.items())):
        color = PALETTE[idx % len(PALETTE)]
        days = [result.source_window_end + 1 + i for i in range(result.horizon)]
        preds = [float(v) for v in result.predictions]
        # anchor each forecast polyline at the last observed day for continuity
        anchor_day = result.source_window_end
        xs = [x_of(anchor_day)] + [x_of(d) for d in days]
        ys = [y_of(float(series.values[anchor_day]))] + [y_of(v) for v in preds]
        attrs = (
            f" data-model={quoteattr(name)}"
            f" data-values={quoteattr(','.join(repr(v) for v in preds))}"
            ' stroke-dasharray="5,3"'
        )
        parts.append(_polyline(xs, ys, color, attrs))
        for d, v in zip(days, preds):
            parts.append(f'<circle cx="{x_of(d):.2f}" cy="{y_of(v):.2f}" r="2.5" fill="{color}"/>')
        parts.append(
            f'<rect x="{WIDTH - MARGIN - 150}" y="{legend_y}" width="12" height="3" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN - 132}" y="{legend_y + 5}" font-size="11">'
            f"{escape(name)}</text>"
        )
        legend_y += 16
    parts.append(
        f'<rect x="{WIDTH - MARGIN - 150}" y="{legend_y}" width="12" height="3" '
        f'fill="{TRUTH_COLOR}"/>'
    )
    parts.append(
        f'<text x="{WIDTH - MARGIN - 132}" y="{legend_y + 5}" font-size="11">ground truth</text>'
    )
    parts.append("</svg>")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
