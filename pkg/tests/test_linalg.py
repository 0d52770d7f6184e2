"""Tests for the SVD-domain decomposition and minimum-norm least squares."""

import numpy as np
import pytest

from svdreg.kernels import build_design_matrix
from svdreg.linalg import SvdDomain, decompose, inverse_transform, mnls, transform_outputs


def random_wide_matrix(seed, n=30, p=60):
    return np.random.default_rng(seed).standard_normal((n, p))


def kernel_problem(seed, n=30, p=60, width=1.0):
    """A wide Gaussian-kernel design with well-spread inputs plus outputs."""
    rng = np.random.default_rng(seed)
    points = rng.uniform(-4.0, 4.0, size=(p, 2))
    g = build_design_matrix(points[:n], points, width)
    y = rng.standard_normal(n)
    return g, y


def synthetic_domain(singular_values, z, p=None):
    """SvdDomain with identity rotations, for exercising weight formulas."""
    s = np.asarray(singular_values, dtype=float)
    n = s.shape[0]
    p = n if p is None else p
    return SvdDomain(
        u=np.eye(n),
        singular_values=s,
        v=np.eye(p, n),
        effective_rank=int(np.count_nonzero(s > 0)),
        z=np.asarray(z, dtype=float),
    )


class TestDecompose:
    def test_identity_two_by_two(self):
        svd = decompose(np.eye(2))
        np.testing.assert_allclose(svd.singular_values, [1.0, 1.0])
        assert svd.effective_rank == 2

    def test_rank_deficient_diagonal(self):
        g = np.array([[3.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        svd = decompose(g)
        np.testing.assert_allclose(svd.singular_values, [3.0, 0.0], atol=1e-14)
        assert svd.effective_rank == 1

    def test_left_vectors_orthonormal(self):
        svd = decompose(random_wide_matrix(0))
        np.testing.assert_allclose(svd.u.T @ svd.u, np.eye(30), atol=1e-10)

    def test_right_vectors_orthonormal(self):
        svd = decompose(random_wide_matrix(1))
        np.testing.assert_allclose(svd.v.T @ svd.v, np.eye(30), atol=1e-10)

    def test_reconstruction(self):
        g = random_wide_matrix(2)
        svd = decompose(g)
        rebuilt = svd.u @ np.diag(svd.singular_values) @ svd.v.T
        assert np.max(np.abs(rebuilt - g)) <= 1e-8

    def test_singular_values_sorted_non_negative(self):
        svd = decompose(random_wide_matrix(3))
        s = svd.singular_values
        assert np.all(s[:-1] >= s[1:])
        assert np.all(s >= 0)

    def test_thin_v_shape(self):
        svd = decompose(random_wide_matrix(4, n=10, p=25))
        assert svd.u.shape == (10, 10)
        assert svd.v.shape == (25, 10)

    def test_effective_rank_uses_relative_cutoff(self):
        # Built from an explicit SVD so the trailing singular value is known.
        rng = np.random.default_rng(5)
        u, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        v, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        s = np.array([5.0, 1.0, 1e-3, 5e-17])
        g = u @ np.diag(s) @ v[:, :4].T
        assert decompose(g).effective_rank == 3
        assert decompose(g, rank_tol=1e-2).effective_rank == 2

    def test_zero_matrix_has_rank_zero(self):
        assert decompose(np.zeros((3, 5))).effective_rank == 0

    def test_rejects_tall_matrix(self):
        with pytest.raises(ValueError, match="wide"):
            decompose(np.zeros((5, 3)))

    def test_rejects_non_finite(self):
        g = np.ones((2, 4))
        g[1, 2] = np.nan
        with pytest.raises(ValueError, match="finite"):
            decompose(g)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            decompose(np.zeros((0, 4)))


class TestTransformOutputs:
    def test_identity_design_returns_outputs(self):
        svd = decompose(np.eye(3))
        y = np.array([1.0, -2.0, 0.5])
        np.testing.assert_allclose(transform_outputs(svd, y), y)

    def test_zero_outputs(self):
        svd = decompose(random_wide_matrix(6, n=5, p=9))
        np.testing.assert_allclose(transform_outputs(svd, np.zeros(5)), np.zeros(5))

    def test_preserves_norm(self):
        for seed in range(5):
            g, y = kernel_problem(seed, n=15, p=30)
            z = transform_outputs(decompose(g), y)
            np.testing.assert_allclose(
                np.linalg.norm(z), np.linalg.norm(y), rtol=1e-10
            )

    def test_dimension_mismatch(self):
        svd = decompose(np.eye(3))
        with pytest.raises(ValueError, match="shape"):
            transform_outputs(svd, np.ones(4))

    def test_with_outputs_attaches(self):
        g, y = kernel_problem(7, n=8, p=16)
        svd = decompose(g)
        assert svd.z is None
        attached = svd.with_outputs(y)
        np.testing.assert_allclose(attached.z, transform_outputs(svd, y))


class TestMnls:
    def test_componentwise_division(self):
        svd = synthetic_domain([2.0, 1.0], [4.0, 3.0])
        np.testing.assert_allclose(mnls(svd), [2.0, 3.0])

    def test_zero_outputs_give_zero_weights(self):
        g, _ = kernel_problem(8, n=6, p=12)
        svd = decompose(g).with_outputs(np.zeros(6))
        np.testing.assert_allclose(mnls(svd), np.zeros(6))

    def test_single_wide_row(self):
        svd = decompose(np.array([[1.0, 1.0]])).with_outputs(np.array([2.0]))
        beta = inverse_transform(svd, mnls(svd))
        np.testing.assert_allclose(beta, [1.0, 1.0], atol=1e-14)

    def test_interpolates_full_rank_systems(self):
        for seed in range(10):
            g, y = kernel_problem(seed, n=20, p=40)
            svd = decompose(g).with_outputs(y)
            beta = inverse_transform(svd, mnls(svd))
            assert np.linalg.norm(g @ beta - y) <= 1e-8 * np.linalg.norm(y)

    def test_matches_dual_pseudoinverse_oracle(self):
        # Independent route: solve G G^T alpha = y, then beta = G^T alpha.
        for seed in range(10):
            g, y = kernel_problem(seed, n=20, p=40)
            oracle = g.T @ np.linalg.solve(g @ g.T, y)
            svd = decompose(g).with_outputs(y)
            beta = inverse_transform(svd, mnls(svd))
            assert np.linalg.norm(beta - oracle) <= 1e-8 * np.linalg.norm(oracle)

    def test_weights_zero_beyond_effective_rank(self):
        rng = np.random.default_rng(9)
        u, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        v, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        s = np.array([2.0, 1.0, 1e-16, 0.0])
        g = u @ np.diag(s) @ v[:, :4].T
        svd = decompose(g).with_outputs(rng.standard_normal(4))
        w = mnls(svd)
        assert svd.effective_rank == 2
        np.testing.assert_allclose(w[2:], 0.0)

    def test_requires_attached_outputs(self):
        svd = decompose(np.eye(3))
        with pytest.raises(ValueError, match="outputs"):
            mnls(svd)


class TestInverseTransform:
    def test_zero_weights_give_zero_coefficients(self):
        svd = decompose(random_wide_matrix(10, n=4, p=9))
        np.testing.assert_allclose(inverse_transform(svd, np.zeros(4)), np.zeros(9))

    def test_square_identity_design(self):
        svd = decompose(np.eye(3))
        w = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(inverse_transform(svd, w), w)

    def test_coefficient_norm_equals_weight_norm(self):
        for seed in range(5):
            g, y = kernel_problem(seed, n=12, p=30)
            svd = decompose(g).with_outputs(y)
            w = mnls(svd)
            beta = inverse_transform(svd, w)
            np.testing.assert_allclose(
                np.linalg.norm(beta), np.linalg.norm(w), rtol=1e-10
            )

    def test_dimension_mismatch(self):
        svd = decompose(np.eye(3))
        with pytest.raises(ValueError, match="shape"):
            inverse_transform(svd, np.ones(4))
