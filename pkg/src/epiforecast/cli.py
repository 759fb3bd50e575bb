"""Command-line benchmark runner.

A JSON config file supplies defaults; flags override individual fields.
Writes the metric report (and optional SVG forecast plots) to the output
directory and exits nonzero if any grid cell failed.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

from .benchmark import MODEL_NAMES, ExperimentConfig, emit_report, run_benchmark


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiforecast",
        description=(
            "Benchmark recurrent and ARIMA forecasters on daily cumulative "
            "case-count series and report k-day accuracy metrics."
        ),
    )
    parser.add_argument("--config", help="JSON config file mirroring the experiment fields")
    parser.add_argument("--data", help="wide-format confirmed-cases CSV")
    parser.add_argument(
        "--country", action="append", help="country to evaluate (repeatable)"
    )
    parser.add_argument(
        "--model", action="append", choices=MODEL_NAMES, help="model to run (repeatable)"
    )
    parser.add_argument(
        "--seq-len", action="append", type=int, help="input window length (repeatable)"
    )
    parser.add_argument(
        "--horizon", action="append", type=int, help="forecast horizon in days (repeatable)"
    )
    parser.add_argument("--inits", type=int, help="random initializations per neural cell")
    parser.add_argument("--seed", type=int, help="base seed for the whole run")
    parser.add_argument("--cutoff", help="last data date to use, YYYY-MM-DD")
    parser.add_argument("--format", choices=("csv", "json"), help="report format")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--plots", action="store_true", help="emit SVG forecast plots")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    overrides = {
        "data_path": args.data,
        "countries": args.country,
        "models": args.model,
        "seq_lengths": args.seq_len,
        "horizons": args.horizon,
        "n_inits": args.inits,
        "base_seed": args.seed,
        "cutoff_date": args.cutoff,
        "report_format": args.format,
        "output_dir": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    if args.plots:
        raw["emit_plots"] = True
    if "data_path" not in raw:
        raise SystemExit("a data file is required: pass --data or set data_path in --config")
    return ExperimentConfig.from_dict(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report = run_benchmark(config)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"report.{config.report_format}"
    emit_report(report, config.report_format, report_path)

    for row in report.rows:
        print(
            f"{row.model:>13} {row.country:>10} n_s={row.n_s:>2} n_p={row.n_p} "
            f"kMAPE={row.kmape_percent:.4f}% kMdSA={row.kmdsa_percent:.4f}%"
        )
    failures = report.metadata["failures"]
    for failure in failures:
        print(
            f"FAILED {failure['model']} {failure['country']} n_s={failure['n_s']} "
            f"n_p={failure['n_p']}: {failure['error']}",
            file=sys.stderr,
        )
    print(f"report written to {report_path}")
    return 1 if failures else 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
