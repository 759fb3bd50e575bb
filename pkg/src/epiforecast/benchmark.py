"""Benchmark orchestration over models x countries x window lengths x horizons.

Each grid cell ingests the country's series, truncates it at the case
threshold, builds windows and the chronological split, trains or fits the
model, and scores the recursive forecasts on the 10 test windows with kMAPE
and kMdSA.  Cells are independent and deterministic given the base seed;
per-cell failures are recorded in the report metadata and do not stop the
run.
"""

from __future__ import annotations

import datetime as dt
import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .arima import ArimaForecaster, ArimaOrders
from .forecasting import ForecastResult, evaluate
from .ingest import parse_jhu_csv
from .neural import NetworkConfig, NeuralForecaster, multi_init_train
from .series import make_windows, split_train_val_test, truncate_below_threshold
from .plotting import emit_plot

NEURAL_MODELS = ("vanilla", "stacked", "bidirectional", "cnn_lstm", "conv_lstm")
MODEL_NAMES = NEURAL_MODELS + ("arima",)
DEFAULT_COUNTRIES = ("US", "Italy", "Spain", "Germany")
DEFAULT_CUTOFF = dt.date(2020, 5, 25)
REPORT_COLUMNS = ("model", "country", "n_s", "n_p", "kmape_percent", "kmdsa_percent")


@dataclass
class ExperimentConfig:
    """Everything a benchmark run needs; JSON config files mirror these fields."""

    data_path: str
    countries: list[str] = field(default_factory=lambda: list(DEFAULT_COUNTRIES))
    cutoff_date: dt.date = DEFAULT_CUTOFF
    threshold: float = 100.0
    models: list[str] = field(default_factory=lambda: list(MODEL_NAMES))
    seq_lengths: list[int] = field(default_factory=lambda: [3, 6, 10, 15])
    horizons: list[int] = field(default_factory=lambda: [1, 3, 5])
    n_inits: int = 100
    base_seed: int = 0
    arima_orders: tuple[int, int, int] = (1, 2, 2)
    arima_seq_length: int = 15
    epochs: int = 200
    output_dir: str = "."
    report_format: str = "csv"
    emit_plots: bool = False

    def __post_init__(self):
        unknown = [m for m in self.models if m not in MODEL_NAMES]
        if unknown:
            raise ValueError(f"unknown models {unknown}; choose from {MODEL_NAMES}")
        if not self.horizons:
            raise ValueError("horizons must be non-empty")
        if self.report_format not in ("csv", "json"):
            raise ValueError(f"report_format must be csv or json, got {self.report_format!r}")
        self.arima_orders = tuple(self.arima_orders)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        if isinstance(data.get("cutoff_date"), str):
            data["cutoff_date"] = dt.date.fromisoformat(data["cutoff_date"])
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ReportRow:
    model: str
    country: str
    n_s: int
    n_p: int
    kmape_percent: float
    kmdsa_percent: float


@dataclass
class MetricReport:
    """One row per grid cell that ran, plus run metadata (seeds, cutoff, failures)."""

    rows: list[ReportRow]
    metadata: dict


def _cell_seed(base_seed: int, model: str, country: str, n_s: int, n_p: int) -> int:
    # stable per-cell seed, independent of grid iteration order
    key = f"{model}|{country}|{n_s}|{n_p}".encode()
    return base_seed + zlib.crc32(key)


def _last_window_result(samples, data) -> ForecastResult:
    last = samples[-1]
    return ForecastResult(
        predictions=data.predictions[-1],
        horizon=data.predictions.shape[1],
        source_window_end=last.window_end_index,
    )


def run_benchmark(config: ExperimentConfig) -> MetricReport:
    """Run the configured grid; returns the report (failures recorded, not raised)."""
    rows: list[ReportRow] = []
    failures: list[dict] = []
    plot_groups: dict[tuple[str, int, int], dict[str, ForecastResult]] = {}
    series_cache: dict[str, object] = {}

    def country_series(name: str):
        if name not in series_cache:
            raw = parse_jhu_csv(config.data_path, name, config.cutoff_date)
            series_cache[name] = truncate_below_threshold(raw, config.threshold)
        return series_cache[name]

    for model in config.models:
        lengths = [config.arima_seq_length] if model == "arima" else config.seq_lengths
        for country in config.countries:
            for n_s in lengths:
                for n_p in config.horizons:
                    try:
                        series = country_series(country)
                        samples = make_windows(series, n_s, n_p)
                        split = split_train_val_test(samples)
                        if model == "arima":
                            forecaster = ArimaForecaster(
                                ArimaOrders(*config.arima_orders), n_s=n_s
                            )
                        else:
                            net_config = NetworkConfig.for_architecture(
                                model,
                                n_s=n_s,
                                seed=_cell_seed(config.base_seed, model, country, n_s, n_p),
                                epochs=config.epochs,
                            )
                            trained, _ = multi_init_train(
                                net_config, split, config.n_inits, val_horizon=n_p
                            )
                            forecaster = NeuralForecaster(trained)
                        cell_kmape, cell_kmdsa, data = evaluate(forecaster, split.test, n_p)
                    except Exception as exc:
                        failures.append(
                            {
                                "model": model,
                                "country": country,
                                "n_s": n_s,
                                "n_p": n_p,
                                "error": f"{type(exc).__name__}: {exc}",
                            }
                        )
                        continue
                    rows.append(
                        ReportRow(model, country, n_s, n_p, cell_kmape, cell_kmdsa)
                    )
                    if config.emit_plots:
                        group = plot_groups.setdefault((country, n_s, n_p), {})
                        group[model] = _last_window_result(split.test, data)

    metadata = {
        "data_path": str(config.data_path),
        "cutoff_date": config.cutoff_date.isoformat(),
        "threshold": config.threshold,
        "base_seed": config.base_seed,
        "n_inits": config.n_inits,
        "epochs": config.epochs,
        "arima_orders": list(config.arima_orders),
        "toolkit_version": __version__,
        "failures": failures,
    }
    report = MetricReport(rows=rows, metadata=metadata)

    if config.emit_plots:
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for (country, n_s, n_p), results in plot_groups.items():
            name = country.replace(" ", "_").replace("/", "-")
            emit_plot(
                series_cache[country],
                results,
                out_dir / f"forecast_{name}_ns{n_s}_np{n_p}.svg",
            )
    return report


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_report(report: MetricReport, fmt: str, path) -> None:
    """Write the report as CSV (rows only) or JSON (rows plus metadata)."""
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for row in report.rows:
            record = asdict(row)
            lines.append(",".join(_format_value(record[col]) for col in REPORT_COLUMNS))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        payload = {
            "metadata": report.metadata,
            "rows": [asdict(row) for row in report.rows],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def load_report(path) -> MetricReport:
    """Inverse of the JSON emitter."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = [ReportRow(**row) for row in payload["rows"]]
    return MetricReport(rows=rows, metadata=payload["metadata"])
