"""Dataset loading, per-trial splitting, and synthetic regression tasks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class Dataset:
    """Numeric regression dataset: feature matrix, targets, column names."""

    features: np.ndarray
    targets: np.ndarray
    feature_names: list[str]
    target_name: str
    n_dropped: int = 0

    @property
    def size(self) -> int:
        return self.features.shape[0]


def load_csv(
    path: str,
    target_column: str,
    feature_columns: list[str] | None = None,
    row_limit: int | None = None,
) -> Dataset:
    """Load a numeric regression dataset from a CSV file with a header row.

    Rows containing unparseable or missing values in the used columns are
    dropped; the count is recorded on the returned Dataset.  When
    ``feature_columns`` is omitted, every numeric column except the target
    is used.  ``row_limit`` keeps only the first rows of the file (before
    cleaning).
    """
    frame = pd.read_csv(path, nrows=row_limit)
    if target_column not in frame.columns:
        raise ValueError(f"target column {target_column!r} not found in {path}")
    if feature_columns is None:
        numeric = frame.drop(columns=[target_column]).apply(pd.to_numeric, errors="coerce")
        feature_columns = [c for c in numeric.columns if not numeric[c].isna().all()]
    else:
        missing = [c for c in feature_columns if c not in frame.columns]
        if missing:
            raise ValueError(f"feature columns {missing} not found in {path}")
    if len(feature_columns) == 0:
        raise ValueError(f"no numeric feature columns in {path}")
    used = frame[list(feature_columns) + [target_column]].apply(pd.to_numeric, errors="coerce")
    clean = used.dropna()
    n_dropped = len(used) - len(clean)
    if len(clean) == 0:
        raise ValueError(f"no usable rows in {path}")
    return Dataset(
        features=clean[list(feature_columns)].to_numpy(dtype=float),
        targets=clean[target_column].to_numpy(dtype=float),
        feature_names=list(feature_columns),
        target_name=target_column,
        n_dropped=n_dropped,
    )


@dataclass(frozen=True)
class TrialSplit:
    """One trial's labeled / unlabeled / test partition of a dataset."""

    x_labeled: np.ndarray
    y_labeled: np.ndarray
    x_unlabeled: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    seed: int
    labeled_idx: np.ndarray = field(repr=False, default=None)
    unlabeled_idx: np.ndarray = field(repr=False, default=None)
    test_idx: np.ndarray = field(repr=False, default=None)


def split_trial(
    dataset: Dataset,
    n: int,
    n_unlab: int,
    test_cap: int | None = None,
    seed: int = 0,
) -> TrialSplit:
    """Split a dataset into labeled, unlabeled, and test rows for one trial.

    A seeded permutation assigns the first ``n`` indices to the labeled
    set, the next ``n_unlab`` to the unlabeled set (targets discarded), and
    the remainder — optionally capped at ``test_cap`` rows — to the test
    set.  The three parts are pairwise disjoint.
    """
    if n < 1 or n_unlab < 0:
        raise ValueError(f"need n >= 1 and n_unlab >= 0, got n={n}, n_unlab={n_unlab}")
    if n + n_unlab >= dataset.size:
        raise ValueError(
            f"n + n_unlab = {n + n_unlab} leaves no test rows in a dataset of "
            f"size {dataset.size}"
        )
    perm = np.random.default_rng(seed).permutation(dataset.size)
    labeled = perm[:n]
    unlabeled = perm[n : n + n_unlab]
    test = perm[n + n_unlab :]
    if test_cap is not None:
        if test_cap < 1:
            raise ValueError(f"test_cap must be positive, got {test_cap}")
        test = test[:test_cap]
    return TrialSplit(
        x_labeled=dataset.features[labeled],
        y_labeled=dataset.targets[labeled],
        x_unlabeled=dataset.features[unlabeled],
        x_test=dataset.features[test],
        y_test=dataset.targets[test],
        seed=seed,
        labeled_idx=labeled,
        unlabeled_idx=unlabeled,
        test_idx=test,
    )


# ---------------------------------------------------------------------------
# Synthetic tasks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticTask:
    """A regression task with known ground truth.

    ``sample_inputs(rng, m)`` draws m input rows; ``target(x)`` returns the
    noiseless response for each row of x.
    """

    name: str
    n_features: int
    sample_inputs: Callable[[np.random.Generator, int], np.ndarray]
    target: Callable[[np.ndarray], np.ndarray]
    noise_sd: float


def _sine_task(noise_sd: float, frequency: float = 1.0, amplitude: float = 1.0) -> SyntheticTask:
    return SyntheticTask(
        name="sine",
        n_features=1,
        sample_inputs=lambda rng, m: rng.uniform(-1.0, 1.0, size=(m, 1)),
        target=lambda x: amplitude * np.sin(np.pi * frequency * x[:, 0]),
        noise_sd=noise_sd,
    )


def _zero_task(noise_sd: float, n_features: int = 1) -> SyntheticTask:
    return SyntheticTask(
        name="zero",
        n_features=n_features,
        sample_inputs=lambda rng, m: rng.uniform(-1.0, 1.0, size=(m, n_features)),
        target=lambda x: np.zeros(x.shape[0]),
        noise_sd=noise_sd,
    )


def _clustered_bumps_task(
    noise_sd: float,
    n_clusters: int = 24,
    cluster_sd: float = 0.02,
    bump_width: float = 0.03,
    amplitude: float = 1.0,
) -> SyntheticTask:
    """Inputs concentrate in tight clusters; the target is a narrow bump of
    alternating sign at each cluster center and ~0 elsewhere.

    All of the target's structure therefore sits exactly where unlabeled
    inputs accumulate, which is the regime where extra kernel centers from
    unlabeled data pay off.
    """
    centers = np.linspace(-1.0, 1.0, n_clusters)
    signs = np.where(np.arange(n_clusters) % 2 == 0, 1.0, -1.0)

    def sample_inputs(rng: np.random.Generator, m: int) -> np.ndarray:
        which = rng.integers(0, n_clusters, size=m)
        return (centers[which] + cluster_sd * rng.standard_normal(m))[:, None]

    def target(x: np.ndarray) -> np.ndarray:
        sq = (x[:, 0][:, None] - centers[None, :]) ** 2
        return amplitude * (np.exp(-sq / (2.0 * bump_width**2)) @ signs)

    return SyntheticTask(
        name="clustered-bumps",
        n_features=1,
        sample_inputs=sample_inputs,
        target=target,
        noise_sd=noise_sd,
    )


def _ring_wave_task(
    noise_sd: float,
    frequency: float = 10.0,
    radial_sd: float = 0.02,
) -> SyntheticTask:
    """Inputs lie on a noisy unit circle; the target oscillates along it.

    The wave's angular period is close to the typical spacing of a small
    labeled sample, so kernel centers at the labeled points alone cannot
    bridge sampling gaps.  Centers drawn from a dense unlabeled sample
    cover the whole circle, and a ridge fit over them recovers the wave
    globally -- the regime where unlabeled inputs pay off.
    """

    def sample_inputs(rng: np.random.Generator, m: int) -> np.ndarray:
        theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
        radius = 1.0 + radial_sd * rng.standard_normal(m)
        return np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])

    def target(x: np.ndarray) -> np.ndarray:
        return np.sin(frequency * np.arctan2(x[:, 1], x[:, 0]))

    return SyntheticTask(
        name="ring-wave",
        n_features=2,
        sample_inputs=sample_inputs,
        target=target,
        noise_sd=noise_sd,
    )


_TASK_FACTORIES = {
    "sine": _sine_task,
    "zero": _zero_task,
    "clustered-bumps": _clustered_bumps_task,
    "ring-wave": _ring_wave_task,
}


def synthetic_task(name: str, noise_sd: float, **params) -> SyntheticTask:
    """Build a named synthetic task; see ``available_tasks`` for names."""
    if name not in _TASK_FACTORIES:
        raise ValueError(f"unknown synthetic task {name!r}; known: {sorted(_TASK_FACTORIES)}")
    return _TASK_FACTORIES[name](noise_sd=noise_sd, **params)


def available_tasks() -> list[str]:
    return sorted(_TASK_FACTORIES)


@dataclass(frozen=True)
class SyntheticTruth:
    """Noiseless target values for every point of a synthetic trial split."""

    f_labeled: np.ndarray
    f_unlabeled: np.ndarray
    f_test: np.ndarray


def generate_synthetic(
    task: SyntheticTask, n: int, n_unlab: int, n_test: int, seed: int = 0
) -> tuple[TrialSplit, SyntheticTruth]:
    """Draw a fresh labeled/unlabeled/test trial from a synthetic task.

    Labeled and test outputs receive independent Gaussian noise of the
    task's standard deviation; the returned truth carries the noiseless
    target at every sampled point.
    """
    if n < 1 or n_unlab < 0 or n_test < 1:
        raise ValueError("need n >= 1, n_unlab >= 0, n_test >= 1")
    rng = np.random.default_rng(seed)
    x_lab = task.sample_inputs(rng, n)
    x_unl = task.sample_inputs(rng, n_unlab)
    x_test = task.sample_inputs(rng, n_test)
    f_lab = task.target(x_lab)
    f_unl = task.target(x_unl)
    f_test = task.target(x_test)
    split = TrialSplit(
        x_labeled=x_lab,
        y_labeled=f_lab + task.noise_sd * rng.standard_normal(n),
        x_unlabeled=x_unl,
        x_test=x_test,
        y_test=f_test + task.noise_sd * rng.standard_normal(n_test),
        seed=seed,
    )
    return split, SyntheticTruth(f_labeled=f_lab, f_unlabeled=f_unl, f_test=f_test)


def make_synthetic_dataset(task: SyntheticTask, size: int, seed: int = 0) -> Dataset:
    """Materialize a synthetic task as a fixed dataset for resplitting trials."""
    if size < 2:
        raise ValueError(f"size must be at least 2, got {size}")
    rng = np.random.default_rng(seed)
    x = task.sample_inputs(rng, size)
    y = task.target(x) + task.noise_sd * rng.standard_normal(size)
    return Dataset(
        features=x,
        targets=y,
        feature_names=[f"x{j}" for j in range(x.shape[1])],
        target_name="y",
    )
