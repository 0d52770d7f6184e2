"""SVD-domain view of a wide design matrix and minimum-norm least squares.

For a design matrix G (n rows, p >= n columns) with thin SVD
``G = U diag(s) V1^T`` (U: n x n, V1: p x n), the outputs are rotated into
``z = U^T y`` and coefficient vectors are handled through their first n
rotated coordinates ``w``, since any component of ``V^T beta`` beyond the
first n does not affect the fit and is zero for minimum-norm solutions.
All estimators in this package operate on (s, z) pairs and map back to
coefficient space with ``inverse_transform``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvdDomain:
    """Thin SVD of a design matrix plus (optionally) the rotated outputs.

    Attributes:
        u: left singular vectors, shape (n, n).
        singular_values: non-increasing, non-negative, length n.
        v: first n right singular vectors, shape (p, n).
        effective_rank: number of singular values above the rank cutoff.
        z: rotated outputs U^T y, length n; None until outputs are attached.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    effective_rank: int
    z: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.singular_values.shape[0]

    @property
    def p(self) -> int:
        return self.v.shape[0]

    def with_outputs(self, y: np.ndarray) -> "SvdDomain":
        """Return a copy with z = U^T y attached."""
        return dataclasses.replace(self, z=transform_outputs(self, y))

    def require_outputs(self) -> np.ndarray:
        if self.z is None:
            raise ValueError("outputs not attached; call with_outputs(y) first")
        return self.z


def decompose(g: np.ndarray, rank_tol: float | None = None) -> SvdDomain:
    """Thin SVD of a wide design matrix.

    Args:
        g: design matrix, shape (n, p) with n <= p.
        rank_tol: relative cutoff; singular values at or below
            ``rank_tol * s[0]`` fall outside the effective rank.  Defaults
            to ``max(n, p) * machine epsilon``.

    Returns:
        SvdDomain with orthonormal U, non-increasing singular values, the
        first n columns of V, and the effective rank.  Rotated outputs are
        not attached; use ``with_outputs``.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2:
        raise ValueError("design matrix must be 2-D")
    n, p = g.shape
    if n == 0 or p == 0:
        raise ValueError("design matrix must be non-empty")
    if n > p:
        raise ValueError(f"expected a wide matrix (n <= p), got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("design matrix contains non-finite entries")
    u, s, vt = np.linalg.svd(g, full_matrices=False)
    if rank_tol is None:
        rank_tol = max(n, p) * np.finfo(float).eps
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    effective_rank = int(np.count_nonzero(s > cutoff))
    return SvdDomain(u=u, singular_values=s, v=vt.T, effective_rank=effective_rank)


def transform_outputs(svd: SvdDomain, y: np.ndarray) -> np.ndarray:
    """Rotate outputs into the SVD domain: z = U^T y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (svd.n,):
        raise ValueError(f"expected outputs of shape ({svd.n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("outputs contain non-finite entries")
    return svd.u.T @ y


def mnls(svd: SvdDomain) -> np.ndarray:
    """Minimum-norm least-squares weights in the SVD domain.

    Returns w with ``w[k] = z[k] / s[k]`` for components within the
    effective rank and 0 beyond it.  ``inverse_transform`` of this vector
    is the minimum-norm least-squares coefficient vector, and its Euclidean
    norm equals the coefficient norm.
    """
    z = svd.require_outputs()
    w = np.zeros(svd.n)
    r = svd.effective_rank
    w[:r] = z[:r] / svd.singular_values[:r]
    return w


def inverse_transform(svd: SvdDomain, w: np.ndarray) -> np.ndarray:
    """Map SVD-domain weights back to coefficient space: beta = V1 w."""
    w = np.asarray(w, dtype=float)
    if w.shape != (svd.n,):
        raise ValueError(f"expected weights of shape ({svd.n},), got {w.shape}")
    return svd.v @ w
