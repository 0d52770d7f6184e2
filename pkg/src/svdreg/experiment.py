"""Method-comparison and unlabeled-data-sweep experiment harness.

A run draws repeated trials from one dataset.  Each trial splits rows into
labeled, unlabeled, and test parts with a per-trial seed, cross-validates
hyper-parameters for every requested method, refits on the full labeled
set, and scores predictions by relative mean squared error (1 - R^2).
Every emitted number other than wall-clock timings is a deterministic
function of the configuration and the base seed.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset, load_csv, make_synthetic_dataset, split_trial, synthetic_task
from .estimators import (
    FittedModel,
    bridge_threshold_weights,
    estimate_noise_variance,
    hard_threshold_weights,
    predict,
    ridge_fit,
    select_theta_sbt,
    ssv_weights,
    top_k_magnitude_weights,
    universal_threshold_level,
)
from .kernels import CenterSet, build_design_matrix, normalize_features
from .linalg import decompose, inverse_transform
from .model_selection import (
    CVConfig,
    cv_select_ridge,
    cv_select_svd,
    cv_select_width_only,
    default_ridge_params,
    default_ridge_widths,
    default_svd_widths,
)

METHODS = ("RR", "RRO", "SSV", "SHT", "SUT", "SBT")

# Fraction of (trial, method) cells that may fail before a run aborts.
FAILURE_ABORT_FRACTION = 0.10


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class ExcessiveFailuresError(RuntimeError):
    """More than the tolerated fraction of trial cells failed."""


def metric_one_minus_r2(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Relative test error: MSE of predictions over MSE of the test mean.

    Values below 1 beat the constant predictor; 0 is a perfect fit.
    """
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("empty test set")
    denom = float(np.mean((y_true - y_true.mean()) ** 2))
    if denom == 0.0:
        raise ValueError("constant test outputs: relative error undefined")
    return float(np.mean((y_true - y_pred) ** 2)) / denom


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs besides the dataset rows themselves.

    ``dataset`` describes the data source: either
    ``{"kind": "csv", "path": ..., "target_column": ..., "feature_columns":
    optional, "row_limit": optional}`` or ``{"kind": "synthetic", "name":
    ..., "size": ..., "noise_sd": ..., "seed": optional, "params":
    optional}``.  Grid fields left as None fall back to the standard grids
    (ridge parameters n * 10^-q for even q up to 16, ridge widths 10^-1..10^6,
    SVD-method widths 10^1..10^-10, component cap floor(2n/3)).
    """

    dataset: dict
    methods: tuple = METHODS
    n: int = 200
    n_unlab: int = 100
    n_unlab_grid: tuple = (10, 20, 50, 100, 200)
    trials: int = 50
    base_seed: int = 0
    k_folds: int = 10
    gamma: int = 7
    stabilizer: float = 1e-12
    ridge_params: tuple | None = None
    ridge_widths: tuple | None = None
    svd_widths: tuple | None = None
    k_max: int | None = None
    test_cap: int | None = None
    normalization_basis: str = "labeled+unlabeled"
    jobs: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        if not isinstance(self.dataset, dict) or "kind" not in self.dataset:
            raise ConfigError("dataset must be a mapping with a 'kind' entry")
        if self.dataset["kind"] not in ("csv", "synthetic"):
            raise ConfigError(f"unknown dataset kind {self.dataset['kind']!r}")
        methods = tuple(str(m).upper() for m in self.methods)
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        if not methods:
            raise ConfigError("at least one method is required")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "n_unlab_grid", tuple(int(v) for v in self.n_unlab_grid))
        for name in ("ridge_params", "ridge_widths", "svd_widths"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(float(v) for v in value))
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.n_unlab < 0 or any(v < 0 for v in self.n_unlab_grid):
            raise ConfigError("unlabeled counts must be non-negative")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        if self.k_folds < 2:
            raise ConfigError(f"k_folds must be at least 2, got {self.k_folds}")
        if self.gamma < 1 or self.gamma % 2 == 0:
            raise ConfigError(f"gamma must be an odd positive integer, got {self.gamma}")
        if self.stabilizer <= 0:
            raise ConfigError(f"stabilizer must be positive, got {self.stabilizer}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be positive, got {self.jobs}")
        if self.normalization_basis not in ("labeled+unlabeled", "labeled"):
            raise ConfigError(
                f"normalization_basis must be 'labeled+unlabeled' or 'labeled', "
                f"got {self.normalization_basis!r}"
            )

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "dataset" not in payload:
            raise ConfigError("config requires a 'dataset' entry")
        return cls(**payload)

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def resolve_dataset(config: ExperimentConfig) -> Dataset:
    """Load or materialize the dataset a config points at."""
    spec = dict(config.dataset)
    kind = spec.pop("kind")
    if kind == "csv":
        try:
            return load_csv(
                spec.pop("path"),
                spec.pop("target_column"),
                feature_columns=spec.pop("feature_columns", None),
                row_limit=spec.pop("row_limit", None),
            )
        except KeyError as exc:
            raise ConfigError(f"csv dataset spec missing {exc}") from exc
    try:
        task = synthetic_task(
            spec.pop("name"), noise_sd=spec.pop("noise_sd"), **spec.pop("params", {})
        )
        return make_synthetic_dataset(task, size=spec.pop("size"), seed=spec.pop("seed", 0))
    except KeyError as exc:
        raise ConfigError(f"synthetic dataset spec missing {exc}") from exc


# ---------------------------------------------------------------------------
# Per-method fitting
# ---------------------------------------------------------------------------


def fit_method(
    method: str,
    x_labeled: np.ndarray,
    y_labeled: np.ndarray,
    x_unlabeled: np.ndarray | None,
    config: ExperimentConfig,
    cv_seed: int,
) -> tuple[FittedModel, dict]:
    """Cross-validate, then fit one method on the full labeled set.

    Returns the fitted model plus the selected hyper-parameters
    (``width`` and the method-specific ``param``: ridge parameter,
    component count, or threshold level).

    RR uses labeled rows only, for normalization statistics as much as for
    centers; every other method builds centers from labeled plus unlabeled
    inputs and, under the default basis, normalizes with the pooled
    statistics.
    """
    method = method.upper()
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    x_labeled = np.asarray(x_labeled, dtype=float)
    y_labeled = np.asarray(y_labeled, dtype=float)
    if x_unlabeled is None:
        x_unlabeled = np.empty((0, x_labeled.shape[1]))
    x_unlabeled = np.asarray(x_unlabeled, dtype=float)

    n = x_labeled.shape[0]
    use_unlabeled = method != "RR"
    if use_unlabeled and config.normalization_basis == "labeled+unlabeled":
        basis = np.vstack([x_labeled, x_unlabeled])
    else:
        basis = x_labeled
    _, _, norm = normalize_features(basis)
    xl = norm.transform(x_labeled)
    if use_unlabeled:
        centers = np.vstack([xl, norm.transform(x_unlabeled)]) if x_unlabeled.size else xl
    else:
        centers = xl

    cv = CVConfig(k_folds=config.k_folds, seed=cv_seed)
    if method in ("RR", "RRO"):
        ridge_params = config.ridge_params or default_ridge_params(n)
        widths = config.ridge_widths or default_ridge_widths()
        result = cv_select_ridge(xl, y_labeled, centers, list(ridge_params), list(widths), cv)
        width = result.best_params["width"]
        lam = result.best_params["ridge_param"]
        beta = ridge_fit(build_design_matrix(xl, centers, width), y_labeled, lam)
        selected = {"width": width, "param": lam}
    else:
        widths = config.svd_widths or default_svd_widths()
        if method in ("SSV", "SHT"):
            k_max = config.k_max if config.k_max is not None else cv.k_max_for(n)
            result = cv_select_svd(
                xl, y_labeled, centers, list(widths), k_max, method.lower(), cv
            )
            width = result.best_params["width"]
            k = result.best_params["k"]
            svd = decompose(build_design_matrix(xl, centers, width)).with_outputs(y_labeled)
            # The full labeled fit can, in principle, have a lower numerical
            # rank than the training folds that chose k.
            k_fit = min(k, svd.effective_rank)
            if method == "SSV":
                w, _ = ssv_weights(svd, k_fit)
            else:
                w, _ = top_k_magnitude_weights(svd, k_fit)
            beta = inverse_transform(svd, w)
            selected = {"width": width, "param": k}
        else:
            result = cv_select_width_only(
                xl,
                y_labeled,
                centers,
                list(widths),
                method.lower(),
                config.gamma,
                config.stabilizer,
                cv,
            )
            width = result.best_params["width"]
            svd = decompose(build_design_matrix(xl, centers, width)).with_outputs(y_labeled)
            sigma2 = estimate_noise_variance(svd, config.stabilizer).sigma2
            if method == "SUT":
                theta = universal_threshold_level(sigma2, svd.n)
                w, _ = hard_threshold_weights(svd, theta)
            else:
                theta, _ = select_theta_sbt(svd, config.gamma, sigma2)
                w, _ = bridge_threshold_weights(svd, theta, config.gamma)
            beta = inverse_transform(svd, w)
            selected = {"width": width, "param": theta}

    model = FittedModel(
        beta=beta,
        centers=CenterSet(points=centers, n_labeled=n),
        width=selected["width"],
        normalization=norm,
        method=method,
    )
    return model, selected


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------


def _score_method(method, x_lab, y_lab, x_unlab, x_test, y_test, config, seed):
    start = time.perf_counter()
    model, selected = fit_method(method, x_lab, y_lab, x_unlab, config, cv_seed=seed)
    metric = metric_one_minus_r2(y_test, predict(model, x_test))
    return {
        "one_minus_r2": metric,
        "width": selected["width"],
        "param": selected["param"],
        "seconds": time.perf_counter() - start,
    }


def _comparison_trial(args) -> list[dict]:
    dataset, config, trial = args
    seed = config.base_seed + trial
    split = split_trial(dataset, config.n, config.n_unlab, config.test_cap, seed)
    records = []
    for method in config.methods:
        base = {"trial": trial, "method": method, "n": config.n, "n_unlab": config.n_unlab}
        try:
            base.update(
                _score_method(
                    method,
                    split.x_labeled,
                    split.y_labeled,
                    split.x_unlabeled,
                    split.x_test,
                    split.y_test,
                    config,
                    seed,
                )
            )
            base["error"] = ""
        except Exception as exc:  # recorded, counted, possibly aborting later
            base.update(
                {"one_minus_r2": None, "width": None, "param": None, "seconds": None}
            )
            base["error"] = f"{type(exc).__name__}: {exc}"
        records.append(base)
    return records


def _sweep_trial(args) -> list[dict]:
    dataset, config, trial = args
    seed = config.base_seed + trial
    max_unlab = max(config.n_unlab_grid)
    split = split_trial(dataset, config.n, max_unlab, config.test_cap, seed)
    records = []
    for method in config.methods:
        # RR ignores unlabeled data, so one fit covers the whole sweep.
        counts = [0] if method == "RR" else list(config.n_unlab_grid)
        for n_unlab in counts:
            base = {"trial": trial, "method": method, "n": config.n, "n_unlab": n_unlab}
            try:
                base.update(
                    _score_method(
                        method,
                        split.x_labeled,
                        split.y_labeled,
                        split.x_unlabeled[:n_unlab],
                        split.x_test,
                        split.y_test,
                        config,
                        seed,
                    )
                )
                base["error"] = ""
            except Exception as exc:
                base.update(
                    {"one_minus_r2": None, "width": None, "param": None, "seconds": None}
                )
                base["error"] = f"{type(exc).__name__}: {exc}"
            records.append(base)
    return records


def _run_trials(dataset, config, worker) -> list[dict]:
    args = [(dataset, config, t) for t in range(config.trials)]
    if config.jobs == 1:
        batches = [worker(a) for a in args]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            batches = list(pool.map(worker, args))
    records = [rec for batch in batches for rec in batch]
    failures = [r for r in records if r["error"]]
    if len(failures) > FAILURE_ABORT_FRACTION * len(records):
        raise ExcessiveFailuresError(
            f"{len(failures)} of {len(records)} trial cells failed; first: "
            f"trial {failures[0]['trial']} {failures[0]['method']}: {failures[0]['error']}"
        )
    return records


@dataclass(frozen=True)
class RunResult:
    """Records plus aggregates of a comparison or sweep run."""

    records: list = field(repr=False)
    summary_rows: list
    fingerprint: str
    metadata: dict


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    # A single trial has no spread to report.
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def _metadata(dataset: Dataset, config: ExperimentConfig) -> dict:
    return {
        "dataset_kind": config.dataset["kind"],
        "dataset_size": dataset.size,
        "n_features": dataset.features.shape[1],
        "target_name": dataset.target_name,
        "rows_dropped": dataset.n_dropped,
        "normalization_basis": config.normalization_basis,
        "test_cap": config.test_cap,
    }


def run_method_comparison(dataset: Dataset, config: ExperimentConfig) -> RunResult:
    """Score every configured method over repeated trials of one dataset."""
    records = _run_trials(dataset, config, _comparison_trial)
    summary_rows = []
    for method in config.methods:
        ok = [r for r in records if r["method"] == method and not r["error"]]
        failed = sum(1 for r in records if r["method"] == method and r["error"])
        mean, std = _mean_std([r["one_minus_r2"] for r in ok]) if ok else (None, None)
        summary_rows.append(
            {
                "method": method,
                "n": config.n,
                "n_unlab": config.n_unlab,
                "mean_one_minus_r2": mean,
                "std_one_minus_r2": std,
                "trials_ok": len(ok),
                "trials_failed": failed,
            }
        )
    return RunResult(
        records=records,
        summary_rows=summary_rows,
        fingerprint=config.fingerprint(),
        metadata=_metadata(dataset, config),
    )


def run_unlabeled_sweep(dataset: Dataset, config: ExperimentConfig) -> RunResult:
    """Track how each method's error moves against RR as unlabeled data grows.

    Per trial, every non-RR method is fit at each unlabeled count (nested
    subsets of one per-trial unlabeled pool, shared test set) and its error
    deviation from the same trial's RR error is aggregated.
    """
    if "RR" not in config.methods:
        raise ConfigError("the unlabeled sweep needs RR as its baseline")
    if len(config.methods) < 2:
        raise ConfigError("the unlabeled sweep needs at least one method besides RR")
    if not config.n_unlab_grid:
        raise ConfigError("n_unlab_grid must not be empty")
    records = _run_trials(dataset, config, _sweep_trial)
    rr_by_trial = {
        r["trial"]: r["one_minus_r2"]
        for r in records
        if r["method"] == "RR" and not r["error"]
    }
    summary_rows = []
    for method in config.methods:
        if method == "RR":
            ok = [r for r in records if r["method"] == "RR" and not r["error"]]
            if ok:
                mean, std = _mean_std([r["one_minus_r2"] for r in ok])
                summary_rows.append(
                    {
                        "method": "RR",
                        "n": config.n,
                        "n_unlab": 0,
                        "mean_one_minus_r2": mean,
                        "std_one_minus_r2": std,
                        "mean_deviation": 0.0,
                        "std_deviation": 0.0,
                        "trials_ok": len(ok),
                    }
                )
            continue
        for n_unlab in config.n_unlab_grid:
            ok = [
                r
                for r in records
                if r["method"] == method
                and r["n_unlab"] == n_unlab
                and not r["error"]
                and r["trial"] in rr_by_trial
            ]
            if not ok:
                continue
            mean, std = _mean_std([r["one_minus_r2"] for r in ok])
            dev_mean, dev_std = _mean_std(
                [r["one_minus_r2"] - rr_by_trial[r["trial"]] for r in ok]
            )
            summary_rows.append(
                {
                    "method": method,
                    "n": config.n,
                    "n_unlab": n_unlab,
                    "mean_one_minus_r2": mean,
                    "std_one_minus_r2": std,
                    "mean_deviation": dev_mean,
                    "std_deviation": dev_std,
                    "trials_ok": len(ok),
                }
            )
    return RunResult(
        records=records,
        summary_rows=summary_rows,
        fingerprint=config.fingerprint(),
        metadata=_metadata(dataset, config),
    )


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

TRIAL_CSV_COLUMNS = (
    "trial",
    "method",
    "n",
    "n_unlab",
    "one_minus_r2",
    "width",
    "param",
    "seconds",
    "error",
    "config_fingerprint",
)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_trial_csv(result: RunResult, path: str) -> None:
    order = sorted(
        range(len(result.records)),
        key=lambda i: (
            result.records[i]["trial"],
            result.records[i]["n_unlab"],
            result.records[i]["method"],
        ),
    )
    lines = [",".join(TRIAL_CSV_COLUMNS)]
    for i in order:
        rec = dict(result.records[i])
        rec["config_fingerprint"] = result.fingerprint
        lines.append(",".join(_format_cell(rec[c]) for c in TRIAL_CSV_COLUMNS))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_summary_csv(result: RunResult, path: str) -> None:
    if not result.summary_rows:
        raise ValueError("no summary rows to write")
    columns = list(result.summary_rows[0].keys()) + ["config_fingerprint"]
    lines = [",".join(columns)]
    for row in result.summary_rows:
        full = dict(row, config_fingerprint=result.fingerprint)
        lines.append(",".join(_format_cell(full[c]) for c in columns))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_summary_json(result: RunResult, config: ExperimentConfig, path: str) -> None:
    payload = {
        "config_fingerprint": result.fingerprint,
        "config": config.to_dict(),
        "metadata": result.metadata,
        "summary": result.summary_rows,
        "failures": [
            {"trial": r["trial"], "method": r["method"], "error": r["error"]}
            for r in result.records
            if r["error"]
        ],
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
