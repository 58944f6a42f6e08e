"""Command-line interface.

Subcommands: ``run`` (full experiment), ``gram`` (debug Gram dump),
``weights`` (inspect strategy weights), ``report`` (re-render a stored
report).  Exit codes: 0 success, 2 config error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import load_config, parse_kernel_string
from .errors import ConfigError, DataError, NumericalError
from .report import ExperimentReport, emit_report, render_csv, render_table


def _cmd_run(args) -> int:
    from .runner import run_experiment

    config = load_config(args.config)
    report = run_experiment(config)
    paths = emit_report(report, config.output_dir, figures=config.figures)
    sys.stdout.write(render_table(report))
    for kind, path in sorted(paths.items()):
        print(f"wrote {kind}: {path}")
    return 0


def _cmd_gram(args) -> int:
    from .dataset import DatasetSchema, load_dataset
    from .kernels import gram

    spec = parse_kernel_string(args.kernel)
    if args.utility_label:
        schema = DatasetSchema(
            utility_column=args.utility_label,
            privacy_column=args.privacy_label or args.utility_label,
        )
        x = load_dataset(args.data, schema).x
    else:
        # no label columns: every column is a feature
        import csv as _csv

        with open(args.data, newline="", encoding="utf-8") as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            try:
                x = np.array([[float(c) for c in row] for row in reader])
            except ValueError as exc:
                raise DataError(f"{args.data}: non-numeric cell: {exc}") from exc
        if x.size == 0:
            raise DataError(f"{args.data}: no data rows")
    k = gram(spec, x).values
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for row in k:
            out.write(",".join(repr(float(v)) for v in row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
            print(f"wrote {k.shape[0]}x{k.shape[1]} Gram to {args.out}")
    return 0


def _cmd_weights(args) -> int:
    from .runner import compute_strategy_weights, prepare_experiment

    config = load_config(args.config)
    prepared = prepare_experiment(config)
    strategy = args.strategy
    rhos = [args.rho_snr] if strategy != "snr" else (
        [args.rho_snr] if args.rho_snr is not None else list(config.snr_rhos)
    )
    for rho in rhos:
        w = compute_strategy_weights(prepared, strategy, rho_snr=rho)
        tag = f"{strategy}(rho={rho:g})" if strategy == "snr" else strategy
        print(tag)
        for pipe, value in zip(prepared.ok_pipelines, w.mu):
            print(f"  {pipe.cfg.name}: {value:.6f}")
    return 0


def _cmd_report(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            report = ExperimentReport.from_json(fh.read())
    except OSError as exc:
        raise DataError(f"cannot open report {args.input}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot parse report {args.input}: {exc}") from exc
    if args.format == "table":
        sys.stdout.write(render_table(report))
    else:
        sys.stdout.write(render_csv(report))
    if args.figures:
        from .figures import render_report_figures

        paths = render_report_figures(report, args.figures)
        for kind, path in sorted(paths.items()):
            print(f"wrote {kind}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmkl",
        description=(
            "Compressive multi-kernel learning: compress kernels through "
            "discriminant projections, combine them, and score utility vs "
            "privacy classifiers on the released kernel."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full experiment from a config file")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.set_defaults(func=_cmd_run)

    p_gram = sub.add_parser("gram", help="dump a raw Gram matrix for debugging")
    p_gram.add_argument(
        "--kernel", required=True, help="kernel spec, e.g. rbf:gamma=0.01 or linear"
    )
    p_gram.add_argument("--data", required=True, help="CSV file with a header row")
    p_gram.add_argument("--utility-label", help="label column to exclude from features")
    p_gram.add_argument("--privacy-label", help="second label column to exclude")
    p_gram.add_argument("--out", help="output path (default: stdout)")
    p_gram.set_defaults(func=_cmd_gram)

    p_weights = sub.add_parser("weights", help="inspect kernel weights of a strategy")
    p_weights.add_argument("--config", required=True, help="YAML experiment config")
    p_weights.add_argument(
        "--strategy",
        required=True,
        choices=["uniform", "alignment", "snr", "upr_qp"],
    )
    p_weights.add_argument(
        "--rho-snr", type=float, default=None, help="snr ridge (snr strategy only)"
    )
    p_weights.set_defaults(func=_cmd_weights)

    p_report = sub.add_parser("report", help="re-render a stored structured report")
    p_report.add_argument("--in", dest="input", required=True, help="report.json path")
    p_report.add_argument("--format", choices=["table", "csv"], default="table")
    p_report.add_argument("--figures", help="also render figures into this directory")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
