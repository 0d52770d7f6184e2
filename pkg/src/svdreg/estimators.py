"""Coefficient estimators: ridge regression and SVD-domain thresholding.

Two families share the Gaussian-kernel design matrix G (n rows, p columns):

* ridge regression, ``beta = (G^T G + lam I)^{-1} G^T y``, computed through
  whichever of the primal/dual forms is cheaper;
* thresholded minimum-norm least squares, which modifies the SVD-domain
  weights ``w[k] = z[k] / s[k]`` componentwise and maps back with V1.

The thresholding rules are: keep the top-k singular components (SSV), hard
thresholding of |z| at a level theta (SHT), hard thresholding at the
universal level sqrt(2 sigma^2 ln n) (SUT), and a smooth bridge between
soft and hard thresholding with odd exponent gamma whose level is chosen
by an unbiased risk estimate (SBT).  Every rule only attenuates weights,
so the coefficient norm never exceeds the minimum-norm solution's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import CenterSet, NormalizationParams, build_design_matrix
from .linalg import SvdDomain, inverse_transform


class DegenerateVarianceError(RuntimeError):
    """All residual weights in the noise-variance estimate underflowed."""


# ---------------------------------------------------------------------------
# Ridge regression
# ---------------------------------------------------------------------------


def ridge_fit(g: np.ndarray, y: np.ndarray, ridge_param: float) -> np.ndarray:
    """Ridge coefficients (G^T G + lam I)^{-1} G^T y.

    Uses the dual identity ``beta = G^T (G G^T + lam I)^{-1} y`` when the
    matrix is wide (p > n) and an augmented least-squares formulation of
    the primal problem otherwise; both evaluate the same formula.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(y, dtype=float)
    if g.ndim != 2:
        raise ValueError("design matrix must be 2-D")
    n, p = g.shape
    if y.shape != (n,):
        raise ValueError(f"expected outputs of shape ({n},), got {y.shape}")
    if ridge_param <= 0:
        raise ValueError(f"ridge parameter must be positive, got {ridge_param}")
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in design matrix or outputs")
    if p > n:
        return dual_ridge_coefficients(g, y, ridge_param)
    # Solving the regularized least-squares problem min ||A beta - b|| with
    # A = [G; sqrt(lam) I] stays accurate when G^T G is nearly singular,
    # which the normal-equations solve is not.
    a = np.vstack([g, np.sqrt(ridge_param) * np.eye(p)])
    b = np.concatenate([y, np.zeros(p)])
    beta, *_ = np.linalg.lstsq(a, b, rcond=None)
    return beta


def dual_ridge_coefficients(
    g: np.ndarray, y: np.ndarray, ridge_param: float, gram: np.ndarray | None = None
) -> np.ndarray:
    """Dual-form ridge: beta = G^T (G G^T + lam I_n)^{-1} y.

    ``gram`` may supply a precomputed G G^T, which cross-validation loops
    reuse across ridge parameters.  When the ridge parameter sits below
    float resolution relative to the gram matrix the system is numerically
    singular; its least-squares minimum-norm solution — the lam -> 0 limit
    — is used instead of failing.
    """
    if gram is None:
        gram = g @ g.T
    a = gram + ridge_param * np.eye(g.shape[0])
    try:
        alpha = np.linalg.solve(a, y)
    except np.linalg.LinAlgError:
        alpha, *_ = np.linalg.lstsq(a, y, rcond=None)
    return g.T @ alpha


# ---------------------------------------------------------------------------
# Thresholding rules in the SVD domain
# ---------------------------------------------------------------------------
#
# Every rule returns (weights, active) where ``weights`` has length n and
# ``active`` lists the indices (0-based, sorted) of retained components.
# Components beyond the effective rank are always zero and never active:
# their minimum-norm weights are already treated as zero, and retaining
# them would divide by a vanishing singular value.


def ssv_weights(svd: SvdDomain, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep the k leading singular components of the minimum-norm weights."""
    z = svd.require_outputs()
    if not 0 <= k <= svd.effective_rank:
        raise ValueError(
            f"k must lie in [0, effective_rank={svd.effective_rank}], got {k}"
        )
    w = np.zeros(svd.n)
    w[:k] = z[:k] / svd.singular_values[:k]
    return w, np.arange(k)


def hard_threshold_weights(svd: SvdDomain, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Hard thresholding: keep component k iff |z[k]| >= theta (inclusive).

    With theta = 0 every component within the effective rank is kept and
    the result equals the minimum-norm weights.
    """
    z = svd.require_outputs()
    if theta < 0:
        raise ValueError(f"threshold must be non-negative, got {theta}")
    keep = np.zeros(svd.n, dtype=bool)
    r = svd.effective_rank
    keep[:r] = np.abs(z[:r]) >= theta
    w = np.zeros(svd.n)
    w[keep] = z[keep] / svd.singular_values[keep]
    return w, np.flatnonzero(keep)


def top_k_magnitude_weights(svd: SvdDomain, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep exactly the k components with the largest |z|.

    Equivalent to hard thresholding at the k-th descending order statistic
    of |z| when magnitudes are distinct; ties resolve toward lower indices
    so the count is exact either way.  This is the enumeration used when a
    hard-thresholding level is chosen by cross-validation over component
    counts.
    """
    z = svd.require_outputs()
    r = svd.effective_rank
    if not 0 <= k <= r:
        raise ValueError(f"k must lie in [0, effective_rank={r}], got {k}")
    order = np.argsort(-np.abs(z[:r]), kind="stable")
    kept = np.sort(order[:k])
    w = np.zeros(svd.n)
    w[kept] = z[kept] / svd.singular_values[kept]
    return w, kept


def universal_threshold_level(sigma2: float, n: int) -> float:
    """Universal threshold sqrt(2 sigma^2 ln n) (natural logarithm)."""
    if sigma2 < 0:
        raise ValueError(f"variance must be non-negative, got {sigma2}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return float(np.sqrt(2.0 * sigma2 * np.log(n)))


def bridge_function(w: np.ndarray, theta: float, gamma: int) -> np.ndarray:
    """Scalar bridge-thresholding map (1 - (theta/|w|)^(1+gamma))_+ w.

    Defined for any integer gamma >= 0: gamma = 0 reduces to soft
    thresholding and gamma -> infinity approaches hard thresholding.
    """
    if theta < 0:
        raise ValueError(f"threshold must be non-negative, got {theta}")
    if gamma < 0 or int(gamma) != gamma:
        raise ValueError(f"gamma must be a non-negative integer, got {gamma}")
    w = np.asarray(w, dtype=float)
    mag = np.abs(w)
    out = np.zeros_like(w)
    m = mag > theta
    out[m] = (1.0 - (theta / mag[m]) ** (1 + gamma)) * w[m]
    return out


def bridge_threshold_weights(
    svd: SvdDomain, theta: float, gamma: int
) -> tuple[np.ndarray, np.ndarray]:
    """Bridge thresholding: keep k iff |z[k]| > theta (strict), attenuated.

    Retained components get weight ``(1 - (theta/z[k])^(1+gamma)) z[k]/s[k]``.
    ``gamma`` must be an odd positive integer so the exponent 1+gamma is
    even and the attenuation factor is sign-free; the strict inequality
    keeps the factor positive and guards the division by z[k].
    """
    z = svd.require_outputs()
    if theta < 0:
        raise ValueError(f"threshold must be non-negative, got {theta}")
    if gamma < 1 or gamma % 2 == 0:
        raise ValueError(f"gamma must be an odd positive integer, got {gamma}")
    r = svd.effective_rank
    keep = np.zeros(svd.n, dtype=bool)
    keep[:r] = np.abs(z[:r]) > theta
    w = np.zeros(svd.n)
    zk = z[keep]
    w[keep] = (1.0 - (theta / zk) ** (1 + gamma)) * zk / svd.singular_values[keep]
    return w, np.flatnonzero(keep)


# ---------------------------------------------------------------------------
# Noise variance and risk estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceEstimate:
    """Residual-based noise variance estimate with its stabilizer."""

    sigma2: float
    stabilizer: float


def estimate_noise_variance(svd: SvdDomain, stabilizer: float = 1e-12) -> VarianceEstimate:
    """Noise variance from ridge-stabilized residual weights.

    With h[i] = s[i] / (s[i] + stabilizer), returns
    ``sum((1-h)^2 z^2) / sum((1-h)^2)``, which concentrates on components
    whose singular values are at or below the stabilizer — the part of the
    spectrum carrying essentially pure noise.
    """
    z = svd.require_outputs()
    if stabilizer <= 0:
        raise ValueError(f"stabilizer must be positive, got {stabilizer}")
    # 1 - h computed directly as stabilizer / (s + stabilizer) to avoid
    # cancellation when s >> stabilizer.
    one_minus_h = stabilizer / (svd.singular_values + stabilizer)
    weights = one_minus_h**2
    denom = float(weights.sum())
    if denom == 0.0:
        raise DegenerateVarianceError(
            "all residual weights underflowed to zero "
            f"(singular values in [{svd.singular_values.min():.3e}, "
            f"{svd.singular_values.max():.3e}], stabilizer {stabilizer:.3e})"
        )
    return VarianceEstimate(sigma2=float((weights * z**2).sum() / denom), stabilizer=stabilizer)


@dataclass(frozen=True)
class RiskEstimate:
    """Unbiased risk estimate for a bridge-thresholding level."""

    value: float
    theta: float
    gamma: int
    n_active: int


def sure_risk(svd: SvdDomain, theta: float, gamma: int, sigma2: float) -> RiskEstimate:
    """Stein-type unbiased estimate of the prediction risk of bridge thresholding.

    For w-tilde = bridge weights at (theta, gamma) and fitted values
    s[k] w-tilde[k], the estimate is

        (1/n) sum (z - s w)^2  -  sigma^2
        + (2 sigma^2 / n) (k_active + gamma * sum_active (theta/z)^(1+gamma))

    whose expectation equals the mean squared error against the noiseless
    rotated outputs.
    """
    z = svd.require_outputs()
    if sigma2 < 0:
        raise ValueError(f"variance must be non-negative, got {sigma2}")
    w, active = bridge_threshold_weights(svd, theta, gamma)
    n = svd.n
    resid = z - svd.singular_values * w
    penalty = active.size
    if active.size:
        penalty = penalty + gamma * float(((theta / z[active]) ** (1 + gamma)).sum())
    value = float(resid @ resid) / n - sigma2 + 2.0 * sigma2 * penalty / n
    return RiskEstimate(value=value, theta=theta, gamma=gamma, n_active=int(active.size))


def select_theta_sbt(svd: SvdDomain, gamma: int, sigma2: float) -> tuple[float, RiskEstimate]:
    """Choose the bridge-thresholding level minimizing the unbiased risk estimate.

    Candidates are the magnitudes {|z[1]|, ..., |z[n]|}; ties in the risk
    break toward the larger level (the sparser model).
    """
    z = svd.require_outputs()
    candidates = np.abs(z)
    risks = [sure_risk(svd, float(theta), gamma, sigma2) for theta in candidates]
    values = np.array([r.value for r in risks])
    minimal = np.flatnonzero(values == values.min())
    best = minimal[np.argmax(candidates[minimal])]
    return float(candidates[best]), risks[best]


# ---------------------------------------------------------------------------
# Fitted models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FittedModel:
    """A kernel regressor ready for prediction on raw inputs.

    Centers live in normalized feature space; ``normalization`` maps raw
    inputs into that space at prediction time.
    """

    beta: np.ndarray
    centers: CenterSet
    width: float
    normalization: NormalizationParams
    method: str

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.centers.size,):
            raise ValueError(
                f"coefficient length {beta.shape} does not match {self.centers.size} centers"
            )
        object.__setattr__(self, "beta", beta)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "width": self.width,
            "beta": self.beta.tolist(),
            "centers": self.centers.points.tolist(),
            "n_labeled_centers": self.centers.n_labeled,
            "normalization_mean": self.normalization.mean.tolist(),
            "normalization_scale": self.normalization.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FittedModel":
        return cls(
            beta=np.asarray(payload["beta"], dtype=float),
            centers=CenterSet(
                points=np.asarray(payload["centers"], dtype=float),
                n_labeled=int(payload["n_labeled_centers"]),
            ),
            width=float(payload["width"]),
            normalization=NormalizationParams(
                mean=np.asarray(payload["normalization_mean"], dtype=float),
                scale=np.asarray(payload["normalization_scale"], dtype=float),
            ),
            method=str(payload["method"]),
        )


def predict(model: FittedModel, x: np.ndarray) -> np.ndarray:
    """Predict at raw inputs: normalize, build kernel rows, apply coefficients."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x_model = model.normalization.transform(x)
    g = build_design_matrix(x_model, model.centers.points, model.width)
    return g @ model.beta
