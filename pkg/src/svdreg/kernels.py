"""Gaussian kernel features and input normalization.

A regressor in this package is a linear combination of Gaussian bumps
``exp(-||x - x_k||^2 / width)`` placed at a set of centers.  Centers may
come from labeled inputs alone or from labeled plus unlabeled inputs, so
the design matrix is typically wide (more columns than rows).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Rows are processed in blocks when building large design matrices so the
# (rows x centers x dims) distance intermediate stays bounded in memory.
_ROW_BLOCK = 512


def _kernel_block(rows: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    # Differences computed directly (not via the norm-expansion trick) so a
    # row equal to a center yields an exact zero distance and a kernel value
    # of exactly 1, even at very small widths.
    diff = rows[:, None, :] - centers[None, :, :]
    sq_dist = np.einsum("ijk,ijk->ij", diff, diff)
    return np.exp(-sq_dist / width)


def gaussian_kernel(x: np.ndarray, center: np.ndarray, width: float) -> float:
    """Evaluate exp(-||x - center||^2 / width) for a single input/center pair.

    Shares its arithmetic with ``build_design_matrix``, so scalar and matrix
    evaluations agree bit for bit.

    Args:
        x: input point, shape (d,) or scalar.
        center: kernel center, same shape as ``x``.
        width: positive kernel width (the divisor of the squared distance).

    Returns:
        Kernel value in (0, 1]; equals 1 exactly when ``x == center``.
    """
    if width <= 0:
        raise ValueError(f"kernel width must be positive, got {width}")
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    if x.shape != center.shape:
        raise ValueError(f"shape mismatch: x {x.shape} vs center {center.shape}")
    block = _kernel_block(np.atleast_1d(x)[None, :], np.atleast_1d(center)[None, :], width)
    return float(block[0, 0])


def build_design_matrix(rows: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    """Kernel design matrix: entry (i, k) is the kernel at rows[i] vs centers[k].

    Args:
        rows: evaluation inputs, shape (n, d).
        centers: kernel centers, shape (p, d).
        width: positive kernel width.

    Returns:
        Array of shape (n, p) with entries in (0, 1].
    """
    if width <= 0:
        raise ValueError(f"kernel width must be positive, got {width}")
    rows = np.asarray(rows, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if rows.ndim != 2 or centers.ndim != 2:
        raise ValueError("rows and centers must be 2-D arrays")
    if rows.shape[1] != centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: rows have {rows.shape[1]} features, "
            f"centers have {centers.shape[1]}"
        )
    if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(centers))):
        raise ValueError("non-finite values in rows or centers")

    n = rows.shape[0]
    out = np.empty((n, centers.shape[0]))
    for start in range(0, n, _ROW_BLOCK):
        block = rows[start : start + _ROW_BLOCK]
        out[start : start + block.shape[0]] = _kernel_block(block, centers, width)
    return out


@dataclass(frozen=True)
class CenterSet:
    """Kernel centers in model (normalized) space.

    ``points`` stacks labeled centers first, then any unlabeled centers;
    ``n_labeled`` records where the boundary sits.
    """

    points: np.ndarray
    n_labeled: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("centers must be a 2-D array")
        if not 0 <= self.n_labeled <= pts.shape[0]:
            raise ValueError("n_labeled out of range")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature affine normalization fitted on a reference set of rows.

    ``mean`` and ``scale`` are the per-column mean and population standard
    deviation of the fitting rows.  Columns whose scale is (numerically)
    zero are mapped to 0 rather than divided by a vanishing scale.
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def identity(cls, n_features: int) -> "NormalizationParams":
        return cls(mean=np.zeros(n_features), scale=np.ones(n_features))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.mean.shape[0]:
            raise ValueError(
                f"dimension mismatch: got {x.shape[1]} features, expected {self.mean.shape[0]}"
            )
        # A column is treated as constant when its spread is negligible
        # relative to its magnitude; rounding noise in the mean would
        # otherwise blow up under division.
        tol = 1e-12 * np.maximum(1.0, np.abs(self.mean))
        inv = np.where(self.scale > tol, 1.0 / np.where(self.scale > tol, self.scale, 1.0), 0.0)
        return (x - self.mean) * inv


def normalize_features(
    fit_rows: np.ndarray, apply_to: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray | None, NormalizationParams]:
    """Z-score columns using statistics of ``fit_rows``; apply to both arrays.

    Args:
        fit_rows: rows used to compute per-column mean and population std,
            shape (m, d) with m >= 2.
        apply_to: optional extra rows transformed with the same parameters.

    Returns:
        (normalized fit_rows, normalized apply_to or None, NormalizationParams).
    """
    fit_rows = np.asarray(fit_rows, dtype=float)
    if fit_rows.ndim != 2:
        raise ValueError("fit_rows must be a 2-D array")
    if fit_rows.shape[0] < 2:
        raise ValueError("need at least 2 rows to estimate normalization statistics")
    if not np.all(np.isfinite(fit_rows)):
        raise ValueError("non-finite values in fit_rows")
    params = NormalizationParams(
        mean=fit_rows.mean(axis=0), scale=fit_rows.std(axis=0, ddof=0)
    )
    out = params.transform(fit_rows)
    applied = None if apply_to is None else params.transform(apply_to)
    return out, applied, params
