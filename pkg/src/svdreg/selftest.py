"""Quick built-in correctness checks, runnable as ``svdreg selftest``.

Each check re-derives an expected result by independent means (direct
pseudoinverse solves, scalar formulas, closed-form values) and compares
the library against it.  The pytest suite covers far more ground; this is
a fast smoke screen for installed environments.
"""

from __future__ import annotations

import numpy as np

from .data import generate_synthetic, synthetic_task
from .estimators import (
    bridge_function,
    bridge_threshold_weights,
    estimate_noise_variance,
    hard_threshold_weights,
    predict,
    ridge_fit,
    ssv_weights,
    sure_risk,
    top_k_magnitude_weights,
    universal_threshold_level,
)
from .experiment import ExperimentConfig, fit_method, metric_one_minus_r2
from .kernels import build_design_matrix
from .linalg import SvdDomain, decompose, inverse_transform, mnls


def _kernel_instance(seed: int, n: int = 20, p: int = 40):
    rng = np.random.default_rng(seed)
    points = rng.uniform(-3.0, 3.0, size=(p, 2))
    g = build_design_matrix(points[:n], points, 1.0)
    y = rng.standard_normal(n)
    return g, y


def _check_interpolation() -> None:
    g, y = _kernel_instance(0)
    svd = decompose(g).with_outputs(y)
    beta = inverse_transform(svd, mnls(svd))
    assert np.linalg.norm(g @ beta - y) <= 1e-8 * np.linalg.norm(y)


def _check_min_norm_oracle() -> None:
    g, y = _kernel_instance(1)
    svd = decompose(g).with_outputs(y)
    beta = inverse_transform(svd, mnls(svd))
    alpha = np.linalg.solve(g @ g.T, y)
    oracle = g.T @ alpha
    assert np.linalg.norm(beta - oracle) <= 1e-8 * np.linalg.norm(oracle)


def _check_isometries() -> None:
    g, y = _kernel_instance(2)
    svd = decompose(g).with_outputs(y)
    assert abs(np.linalg.norm(svd.z) - np.linalg.norm(y)) <= 1e-10 * np.linalg.norm(y)
    w = mnls(svd)
    beta = inverse_transform(svd, w)
    assert abs(np.linalg.norm(beta) - np.linalg.norm(w)) <= 1e-10 * np.linalg.norm(w)


def _check_shrinkage() -> None:
    g, y = _kernel_instance(3)
    svd = decompose(g).with_outputs(y)
    base = np.linalg.norm(mnls(svd))
    sigma2 = estimate_noise_variance(svd).sigma2
    thetas = np.abs(svd.z)
    for k in range(svd.effective_rank + 1):
        assert np.linalg.norm(ssv_weights(svd, k)[0]) <= base + 1e-12
        assert np.linalg.norm(top_k_magnitude_weights(svd, k)[0]) <= base + 1e-12
    for theta in thetas:
        assert np.linalg.norm(hard_threshold_weights(svd, theta)[0]) <= base + 1e-12
        assert np.linalg.norm(bridge_threshold_weights(svd, theta, 7)[0]) <= base + 1e-12
    level = universal_threshold_level(sigma2, svd.n)
    assert np.linalg.norm(hard_threshold_weights(svd, level)[0]) <= base + 1e-12


def _check_hard_threshold_forms() -> None:
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        lam = np.sort(rng.uniform(0.5, 3.0, n))[::-1]
        z = rng.standard_normal(n) * rng.uniform(0.5, 2.0)
        theta = float(rng.uniform(0.0, 2.0))
        w_hat = z / lam
        keep_w = np.abs(w_hat) >= theta / lam
        keep_z = np.abs(z) >= theta
        assert np.array_equal(keep_w, keep_z)


def _check_bridge_endpoints() -> None:
    z = np.linspace(-4.0, 4.0, 201)
    theta = 1.0
    soft = np.sign(z) * np.maximum(np.abs(z) - theta, 0.0)
    assert np.max(np.abs(bridge_function(z, theta, 0) - soft)) <= 1e-12
    far = z[np.abs(z) >= 1.1 * theta]
    hard = far.copy()
    out = bridge_function(far, theta, 101)
    assert np.max(np.abs(out - hard) / np.abs(hard)) <= 1e-3


def _check_variance_estimate() -> None:
    rng = np.random.default_rng(5)
    n = 16
    z = rng.standard_normal(n)
    svd = SvdDomain(
        u=np.eye(n), singular_values=np.ones(n), v=np.eye(n), effective_rank=n, z=z
    )
    est = estimate_noise_variance(svd, stabilizer=1.0)
    assert abs(est.sigma2 - np.mean(z**2)) <= 1e-12


def _check_sure_value() -> None:
    svd = SvdDomain(
        u=np.array([[1.0]]),
        singular_values=np.array([1.0]),
        v=np.array([[1.0], [0.0]]),
        effective_rank=1,
        z=np.array([2.0]),
    )
    est = sure_risk(svd, theta=1.0, gamma=1, sigma2=1.0)
    assert abs(est.value - 1.75) <= 1e-12


def _check_universal_level() -> None:
    expected = float(np.sqrt(2.0 * np.log(100.0)))
    assert abs(universal_threshold_level(1.0, 100) - expected) <= 1e-12
    assert universal_threshold_level(1.0, 1) == 0.0
    assert universal_threshold_level(0.0, 50) == 0.0


def _check_metric() -> None:
    y = np.array([0.0, 2.0])
    assert metric_one_minus_r2(y, y) == 0.0
    assert abs(metric_one_minus_r2(y, np.array([1.0, 1.0])) - 1.0) <= 1e-12


def _check_end_to_end() -> None:
    task = synthetic_task("sine", noise_sd=0.1)
    split, _ = generate_synthetic(task, n=40, n_unlab=20, n_test=50, seed=11)
    config = ExperimentConfig(
        dataset={"kind": "synthetic", "name": "sine", "size": 200, "noise_sd": 0.1},
        methods=("RR", "SBT"),
        n=40,
        n_unlab=20,
        trials=1,
        k_folds=5,
        ridge_widths=(0.1, 1.0),
        ridge_params=(1.0, 1e-4),
        svd_widths=(1.0, 0.1, 0.01),
    )
    for method in config.methods:
        model, _ = fit_method(
            method, split.x_labeled, split.y_labeled, split.x_unlabeled, config, cv_seed=0
        )
        value = metric_one_minus_r2(split.y_test, predict(model, split.x_test))
        assert np.isfinite(value)


def _check_ridge_forms() -> None:
    rng = np.random.default_rng(6)
    g = rng.standard_normal((10, 25))
    y = rng.standard_normal(10)
    lam = 0.5
    primal = np.linalg.solve(g.T @ g + lam * np.eye(25), g.T @ y)
    assert np.linalg.norm(ridge_fit(g, y, lam) - primal) <= 1e-8 * np.linalg.norm(primal)


CHECKS = [
    ("mnls interpolates wide kernel systems", _check_interpolation),
    ("mnls matches the dual pseudoinverse solve", _check_min_norm_oracle),
    ("output rotation and coefficient map are isometries", _check_isometries),
    ("thresholding never grows the coefficient norm", _check_shrinkage),
    ("hard threshold w-domain and z-domain forms agree", _check_hard_threshold_forms),
    ("bridge endpoints reduce to soft/hard thresholding", _check_bridge_endpoints),
    ("noise variance estimate matches closed form", _check_variance_estimate),
    ("risk estimate matches hand-computed value", _check_sure_value),
    ("universal threshold level matches closed form", _check_universal_level),
    ("relative error metric matches hand values", _check_metric),
    ("ridge dual form matches the primal solve", _check_ridge_forms),
    ("end-to-end fit and score on synthetic data", _check_end_to_end),
]


def run() -> int:
    failures = 0
    for label, check in CHECKS:
        try:
            check()
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL  {label}: {type(exc).__name__}: {exc}")
        else:
            print(f"PASS  {label}")
    if failures:
        print(f"{failures} of {len(CHECKS)} checks failed")
        return 1
    print(f"all {len(CHECKS)} checks passed")
    return 0
