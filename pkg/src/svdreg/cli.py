"""Command-line interface: experiments, sweeps, single fits, predictions."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import pandas as pd

from . import selftest as selftest_module
from .data import load_csv
from .estimators import FittedModel, predict
from .experiment import (
    METHODS,
    ConfigError,
    ExcessiveFailuresError,
    ExperimentConfig,
    fit_method,
    resolve_dataset,
    run_method_comparison,
    run_unlabeled_sweep,
    write_summary_csv,
    write_summary_json,
    write_trial_csv,
)


def _add_run_flags(parser: argparse.ArgumentParser, sweep: bool) -> None:
    parser.add_argument("--config", help="JSON file of ExperimentConfig fields")
    parser.add_argument("--dataset", help="CSV path (overrides the config's dataset)")
    parser.add_argument("--target", help="target column name for --dataset")
    parser.add_argument(
        "--methods", help=f"comma-separated subset of {','.join(METHODS)}"
    )
    parser.add_argument("--n", type=int, help="labeled sample count per trial")
    if sweep:
        parser.add_argument(
            "--n-unlab", help="comma-separated unlabeled counts, e.g. 10,20,50,100,200"
        )
    else:
        parser.add_argument("--n-unlab", type=int, help="unlabeled sample count per trial")
    parser.add_argument("--trials", type=int, help="number of repeated trials")
    parser.add_argument("--seed", type=int, help="base seed; trial t uses seed base+t")
    parser.add_argument("--jobs", type=int, help="parallel trial workers")
    parser.add_argument("--out-dir", help="directory for result files")


def _build_config(args: argparse.Namespace, sweep: bool) -> ExperimentConfig:
    payload: dict = {}
    if args.config:
        try:
            with open(args.config) as handle:
                payload = json.load(handle)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config file must contain a JSON object")
    if args.dataset:
        if not args.target:
            raise ConfigError("--dataset requires --target")
        payload["dataset"] = {"kind": "csv", "path": args.dataset, "target_column": args.target}
    if args.methods:
        payload["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    for flag, key in (("n", "n"), ("trials", "trials"), ("seed", "base_seed"),
                      ("jobs", "jobs"), ("out_dir", "out_dir")):
        value = getattr(args, flag)
        if value is not None:
            payload[key] = value
    if args.n_unlab is not None:
        if sweep:
            try:
                payload["n_unlab_grid"] = [int(v) for v in str(args.n_unlab).split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad --n-unlab list: {args.n_unlab!r}") from exc
        else:
            payload["n_unlab"] = args.n_unlab
    if "dataset" not in payload:
        raise ConfigError("no dataset given; use --config or --dataset/--target")
    return ExperimentConfig.from_dict(payload)


def _run_experiment(args: argparse.Namespace, sweep: bool) -> int:
    config = _build_config(args, sweep)
    dataset = resolve_dataset(config)
    if sweep:
        result = run_unlabeled_sweep(dataset, config)
        prefix = "sweep_"
    else:
        result = run_method_comparison(dataset, config)
        prefix = ""
    os.makedirs(config.out_dir, exist_ok=True)
    trial_path = os.path.join(config.out_dir, f"{prefix}trials.csv")
    summary_csv = os.path.join(config.out_dir, f"{prefix}summary.csv")
    summary_json = os.path.join(config.out_dir, f"{prefix}summary.json")
    write_trial_csv(result, trial_path)
    write_summary_csv(result, summary_csv)
    write_summary_json(result, config, summary_json)
    print(f"config fingerprint: {result.fingerprint}")
    for row in result.summary_rows:
        mean = row["mean_one_minus_r2"]
        std = row["std_one_minus_r2"]
        line = f"  {row['method']:<4} n_unlab={row['n_unlab']:<6}"
        if mean is None:
            line += " all trials failed"
        else:
            line += f" 1-R2 = {mean:.4f} +/- {std:.4f} ({row['trials_ok']} trials)"
            if "mean_deviation" in row:
                line += f", deviation vs RR = {row['mean_deviation']:+.4f}"
        print(line)
    print(f"wrote {trial_path}, {summary_csv}, {summary_json}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    features = [c.strip() for c in args.features.split(",")] if args.features else None
    dataset = load_csv(args.dataset, args.target, feature_columns=features)
    x_unlab = None
    if args.unlabeled:
        # Unlabeled CSVs carry features only, so read them directly.
        frame = pd.read_csv(args.unlabeled)
        missing = [c for c in dataset.feature_names if c not in frame.columns]
        if missing:
            raise ConfigError(f"unlabeled CSV lacks feature columns {missing}")
        coerced = frame[dataset.feature_names].apply(pd.to_numeric, errors="coerce").dropna()
        x_unlab = coerced.to_numpy(dtype=float)
    config = ExperimentConfig(
        dataset={"kind": "csv", "path": args.dataset, "target_column": args.target},
        methods=(args.method,),
        n=dataset.size,
        k_folds=args.k_folds,
        gamma=args.gamma,
    )
    model, selected = fit_method(
        args.method, dataset.features, dataset.targets, x_unlab, config, cv_seed=args.seed
    )
    payload = {
        "model": model.to_dict(),
        "feature_names": dataset.feature_names,
        "target_name": dataset.target_name,
        "selected": selected,
        "seed": args.seed,
    }
    with open(args.model_out, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    print(
        f"fit {model.method} on {dataset.size} rows: width={selected['width']:g}, "
        f"param={selected['param']:g}; wrote {args.model_out}"
    )
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    try:
        with open(args.model) as handle:
            payload = json.load(handle)
        model = FittedModel.from_dict(payload["model"])
        feature_names = payload["feature_names"]
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {args.model}: {exc}") from exc
    frame = pd.read_csv(args.dataset)
    missing = [c for c in feature_names if c not in frame.columns]
    if missing:
        raise ConfigError(f"input CSV lacks feature columns {missing}")
    coerced = frame[feature_names].apply(pd.to_numeric, errors="coerce")
    if coerced.isna().any().any():
        raise ConfigError("input CSV contains non-numeric or missing feature values")
    preds = predict(model, coerced.to_numpy(dtype=float))
    if args.out:
        pd.DataFrame({"prediction": preds}).to_csv(args.out, index=False)
        print(f"wrote {len(preds)} predictions to {args.out}")
    else:
        for value in preds:
            print(format(float(value), ".17g"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svdreg",
        description="Gaussian-kernel regression with SVD-domain thresholding "
        "and semi-supervised kernel centers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="compare methods over repeated trials")
    _add_run_flags(exp, sweep=False)

    sweep = sub.add_parser("sweep", help="sweep the unlabeled sample count against RR")
    _add_run_flags(sweep, sweep=True)

    fit = sub.add_parser("fit", help="cross-validate and fit one model")
    fit.add_argument("--dataset", required=True, help="labeled CSV path")
    fit.add_argument("--target", required=True, help="target column name")
    fit.add_argument("--features", help="comma-separated feature columns (default: numeric)")
    fit.add_argument("--unlabeled", help="CSV of additional unlabeled inputs")
    fit.add_argument("--method", default="SBT", choices=list(METHODS))
    fit.add_argument("--k-folds", type=int, default=10)
    fit.add_argument("--gamma", type=int, default=7)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--model-out", required=True, help="where to write the model JSON")

    pred = sub.add_parser("predict", help="predict with a saved model JSON")
    pred.add_argument("--model", required=True, help="model JSON from 'fit'")
    pred.add_argument("--dataset", required=True, help="CSV of inputs")
    pred.add_argument("--out", help="output CSV (default: print to stdout)")

    sub.add_parser("selftest", help="run quick built-in correctness checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "experiment":
            return _run_experiment(args, sweep=False)
        if args.command == "sweep":
            return _run_experiment(args, sweep=True)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "selftest":
            return selftest_module.run()
    except ExcessiveFailuresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
