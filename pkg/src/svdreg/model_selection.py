"""Hyper-parameter selection by k-fold cross-validation.

Folds partition the labeled rows only; the kernel centers (columns of the
design matrix) are fixed throughout, so unlabeled centers stay available
to every training fold.  Validation quality is the *sum* of squared
errors accumulated over folds, and ties between candidates break toward
simpler models first (larger ridge parameter / fewer components), then
toward smoother kernels (larger width).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    bridge_threshold_weights,
    estimate_noise_variance,
    hard_threshold_weights,
    select_theta_sbt,
    universal_threshold_level,
)
from .kernels import build_design_matrix
from .linalg import decompose, mnls


@dataclass(frozen=True)
class CVConfig:
    """Cross-validation protocol parameters."""

    k_folds: int = 10
    seed: int = 0

    def k_max_for(self, n: int) -> int:
        """Largest component count examined for n labeled samples: floor(2n/3)."""
        return (2 * n) // 3


@dataclass(frozen=True)
class CVResult:
    """Outcome of a cross-validation run.

    ``records`` holds one ``{"params": {...}, "error_sum": float}`` entry
    per candidate, ``folds`` the (train, validation) index pairs used.
    """

    best_params: dict
    records: list = field(repr=False)
    folds: list = field(repr=False)


def kfold_split(n: int, k_folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic k-fold partition of range(n).

    A seeded permutation is cut into k contiguous chunks whose sizes differ
    by at most one; each chunk validates once while the rest train.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 2 <= k_folds <= n:
        raise ValueError(f"k_folds must lie in [2, n={n}], got {k_folds}")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k_folds)
    folds = []
    start = 0
    for i in range(k_folds):
        size = base + (1 if i < extra else 0)
        val = np.sort(perm[start : start + size])
        train = np.sort(np.concatenate([perm[:start], perm[start + size :]]))
        folds.append((train, val))
        start += size
    return folds


# ---------------------------------------------------------------------------
# Default hyper-parameter grids
# ---------------------------------------------------------------------------


def default_ridge_params(n: int) -> list[float]:
    """Ridge parameters n * 10^-q for q = 0, 2, ..., 16."""
    return [n * 10.0**-q for q in range(0, 17, 2)]


def default_ridge_widths() -> list[float]:
    """Kernel widths 10^q for q = -1, ..., 6 used with ridge regression."""
    return [10.0**q for q in range(-1, 7)]


def default_svd_widths() -> list[float]:
    """Kernel widths 10^-q for q = -1, ..., 10 used with SVD-domain estimators."""
    return [10.0**-q for q in range(-1, 11)]


# ---------------------------------------------------------------------------
# CV drivers
# ---------------------------------------------------------------------------


def _select(records: list[dict], preference) -> dict:
    """Pick the record with the smallest error sum.

    ``preference`` maps a record to a sort key; among exactly tied error
    sums the earliest record in preference order wins.
    """
    ordered = sorted(records, key=preference)
    best = ordered[0]
    for rec in ordered[1:]:
        if rec["error_sum"] < best["error_sum"]:
            best = rec
    return best


def cv_select_ridge(
    x: np.ndarray,
    y: np.ndarray,
    centers: np.ndarray,
    ridge_params: list[float],
    widths: list[float],
    cv: CVConfig,
) -> CVResult:
    """Joint CV over (ridge parameter, kernel width) for ridge regression.

    Ties break toward the larger ridge parameter, then the larger width.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(ridge_params) == 0 or len(widths) == 0:
        raise ValueError("empty hyper-parameter grid")
    folds = kfold_split(x.shape[0], cv.k_folds, cv.seed)
    sums = {(lam, tau): 0.0 for lam in ridge_params for tau in widths}
    for tau in widths:
        g_full = build_design_matrix(x, centers, tau)
        for train, val in folds:
            g_train = g_full[train]
            gram = g_train @ g_train.T
            cross = g_full[val] @ g_train.T
            y_train, y_val = y[train], y[val]
            eye = np.eye(train.shape[0])
            for lam in ridge_params:
                a = gram + lam * eye
                try:
                    alpha = np.linalg.solve(a, y_train)
                except np.linalg.LinAlgError:
                    # A ridge parameter below float resolution (e.g. the
                    # small end of the default grid at a huge width) leaves
                    # the system numerically singular; score the candidate
                    # by its lam -> 0 minimum-norm limit instead of failing.
                    alpha, *_ = np.linalg.lstsq(a, y_train, rcond=None)
                resid = y_val - cross @ alpha
                sums[(lam, tau)] += float(resid @ resid)
    records = [
        {"params": {"ridge_param": lam, "width": tau}, "error_sum": sums[(lam, tau)]}
        for lam in ridge_params
        for tau in widths
    ]
    best = _select(
        records,
        lambda r: (-r["params"]["ridge_param"], -r["params"]["width"]),
    )
    return CVResult(best_params=dict(best["params"]), records=records, folds=folds)


def cv_select_svd(
    x: np.ndarray,
    y: np.ndarray,
    centers: np.ndarray,
    widths: list[float],
    k_max: int,
    method: str,
    cv: CVConfig,
) -> CVResult:
    """Joint CV over (kernel width, component count) for SSV or SHT.

    For each width and fold, a single SVD serves every candidate k: the
    validation prediction grows one component at a time, in singular-value
    order for SSV and in descending |z| order for SHT.  Candidate counts
    are truncated (with a warning) to the smallest effective rank seen in
    any fold at that width.  Ties break toward smaller k, then larger width.
    """
    if method not in ("ssv", "sht"):
        raise ValueError(f"method must be 'ssv' or 'sht', got {method!r}")
    if k_max < 0:
        raise ValueError(f"k_max must be non-negative, got {k_max}")
    if len(widths) == 0:
        raise ValueError("empty width grid")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = kfold_split(x.shape[0], cv.k_folds, cv.seed)
    records = []
    truncated_widths = []
    for tau in widths:
        g_full = build_design_matrix(x, centers, tau)
        fold_errors = []
        for train, val in folds:
            svd = decompose(g_full[train]).with_outputs(y[train])
            r = svd.effective_rank
            w_full = mnls(svd)
            if method == "ssv":
                order = np.arange(r)
            else:
                order = np.argsort(-np.abs(svd.z[:r]), kind="stable")
            m = g_full[val] @ svd.v
            y_val = y[val]
            errs = np.empty(r + 1)
            pred = np.zeros(val.shape[0])
            errs[0] = float((y_val - pred) @ (y_val - pred))
            for j, comp in enumerate(order):
                pred = pred + w_full[comp] * m[:, comp]
                resid = y_val - pred
                errs[j + 1] = float(resid @ resid)
            fold_errors.append(errs)
        k_cap = min(k_max, min(len(e) - 1 for e in fold_errors))
        if k_cap < k_max:
            truncated_widths.append(tau)
        for k in range(k_cap + 1):
            records.append(
                {
                    "params": {"k": k, "width": tau},
                    "error_sum": float(sum(e[k] for e in fold_errors)),
                }
            )
    if truncated_widths:
        warnings.warn(
            f"k_max={k_max} exceeds the effective rank of some training folds at "
            f"widths {truncated_widths}; candidate counts were truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    best = _select(records, lambda r: (r["params"]["k"], -r["params"]["width"]))
    return CVResult(best_params=dict(best["params"]), records=records, folds=folds)


def cv_select_width_only(
    x: np.ndarray,
    y: np.ndarray,
    centers: np.ndarray,
    widths: list[float],
    method: str,
    gamma: int,
    stabilizer: float,
    cv: CVConfig,
) -> CVResult:
    """CV over kernel width alone, for the self-tuning SUT and SBT rules.

    Within each training fold the threshold level is set from the fold's
    own data (estimated noise variance, plus risk minimization for SBT),
    so only the width needs validating.  Ties break toward larger width.
    """
    if method not in ("sut", "sbt"):
        raise ValueError(f"method must be 'sut' or 'sbt', got {method!r}")
    if len(widths) == 0:
        raise ValueError("empty width grid")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = kfold_split(x.shape[0], cv.k_folds, cv.seed)
    records = []
    for tau in widths:
        g_full = build_design_matrix(x, centers, tau)
        error_sum = 0.0
        for fold_index, (train, val) in enumerate(folds):
            try:
                svd = decompose(g_full[train]).with_outputs(y[train])
                sigma2 = estimate_noise_variance(svd, stabilizer).sigma2
                if method == "sut":
                    theta = universal_threshold_level(sigma2, svd.n)
                    w, _ = hard_threshold_weights(svd, theta)
                else:
                    theta, _ = select_theta_sbt(svd, gamma, sigma2)
                    w, _ = bridge_threshold_weights(svd, theta, gamma)
            except Exception as exc:
                raise type(exc)(f"width {tau}, fold {fold_index}: {exc}") from exc
            resid = y[val] - (g_full[val] @ svd.v) @ w
            error_sum += float(resid @ resid)
        records.append({"params": {"width": tau}, "error_sum": error_sum})
    best = _select(records, lambda r: (-r["params"]["width"],))
    return CVResult(best_params=dict(best["params"]), records=records, folds=folds)
