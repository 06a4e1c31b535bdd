import numpy as np
import pytest

from hpdstensor import tensor_core as tc
from hpdstensor.errors import ArgumentError, NumericError, ShapeError
from hpdstensor.kernels import (RankTolerance, compact_svd, least_squares,
                                numerical_rank, pinv, subspace_equal)


class TestCompactSvd:
    def test_identity(self):
        d = compact_svd(np.eye(3))
        assert d.rank == 3
        assert np.allclose(d.S, np.ones(3))
        assert np.allclose(d.U @ d.V.T, np.eye(3))

    def test_rank_one_outer_product(self):
        u = np.array([3.0, 4.0])
        v = np.array([1.0, 2.0, 2.0])
        d = compact_svd(np.outer(u, v))
        assert d.rank == 1
        assert np.isclose(d.S[0], np.linalg.norm(u) * np.linalg.norm(v))

    def test_reconstruction(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((5, 3))
        d = compact_svd(m)
        assert np.linalg.norm(d.matrix() - m) <= 1e-12 * np.linalg.norm(m)

    def test_zero_matrix_empty_decomposition(self):
        d = compact_svd(np.zeros((4, 2)))
        assert d.rank == 0
        assert d.U.shape == (4, 0) and d.V.shape == (2, 0)

    def test_non_finite_rejected(self):
        with pytest.raises(NumericError):
            compact_svd(np.array([[1.0, np.inf]]))

    def test_deterministic_and_sign_fixed(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((6, 4))
        d1, d2 = compact_svd(m), compact_svd(m)
        assert np.array_equal(d1.U, d2.U)
        assert np.array_equal(d1.V, d2.V)
        for j in range(d1.rank):
            lead = np.argmax(np.abs(d1.U[:, j]))
            assert d1.U[lead, j] > 0

    def test_orthonormal_factors(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((7, 3)) @ rng.standard_normal((3, 5))
        d = compact_svd(m)
        assert np.max(np.abs(d.U.T @ d.U - np.eye(d.rank))) <= 1e-10
        assert np.max(np.abs(d.V.T @ d.V - np.eye(d.rank))) <= 1e-10
        assert np.all(np.diff(d.S) <= 0) and np.all(d.S > 0)

    def test_absolute_tolerance_mode(self):
        m = np.diag([1.0, 1e-3, 1e-9])
        assert compact_svd(m, RankTolerance("absolute", 1e-6)).rank == 2
        assert compact_svd(m, RankTolerance("relative", 1e-6)).rank == 2
        assert compact_svd(m).rank == 3

    def test_bad_tolerance(self):
        with pytest.raises(ArgumentError):
            RankTolerance("fuzzy", 1.0)
        with pytest.raises(ArgumentError):
            RankTolerance("relative", -1.0)


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(5)) == 5

    def test_duplicated_column(self):
        u = np.array([[1.0], [2.0], [3.0]])
        assert numerical_rank(np.hstack([u, 2 * u])) == 1

    def test_khatri_rao_power_multiset_bound(self):
        # columns of the squared Khatri-Rao power live in the symmetric
        # subspace, whose dimension is the multiset count C(n+1, 2)
        rng = np.random.default_rng(3)
        n, t = 4, 30
        x = rng.standard_normal((n, t))
        bound = n * (n + 1) // 2
        assert numerical_rank(tc.khatri_rao_power(x, 2)) <= bound

    def test_invariance_under_orthogonal_maps(self):
        rng = np.random.default_rng(4)
        m = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 6))
        q1, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        q2, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        assert numerical_rank(q1 @ m @ q2) == numerical_rank(m) == 2
        perm = rng.permutation(6)
        assert numerical_rank(m[:, perm]) == 2


class TestPinv:
    def test_invertible_matches_inverse(self):
        m = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert np.allclose(pinv(m), np.linalg.inv(m))

    def test_zero(self):
        assert not np.any(pinv(np.zeros((3, 2))))
        assert pinv(np.zeros((3, 2))).shape == (2, 3)

    def test_penrose_identities(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((4, 6))
        p = pinv(m)
        assert np.max(np.abs(m @ p @ m - m)) <= 1e-10
        assert np.max(np.abs(p @ m @ p - p)) <= 1e-10
        assert np.max(np.abs((m @ p).T - m @ p)) <= 1e-10
        assert np.max(np.abs((p @ m).T - p @ m)) <= 1e-10

    def test_double_pinv_restores_full_rank_matrix(self):
        rng = np.random.default_rng(6)
        m = rng.standard_normal((5, 3))
        assert np.max(np.abs(pinv(pinv(m)) - m)) <= 1e-10


class TestLeastSquares:
    def test_square_consistent(self):
        a = np.array([[2.0, 0.0], [0.0, 4.0]])
        b = np.array([[2.0], [8.0]])
        assert np.allclose(least_squares(a, b), [[1.0], [2.0]])

    def test_residual_orthogonal_to_range(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((10, 3))
        b = rng.standard_normal((10, 2))
        x = least_squares(a, b)
        assert np.max(np.abs(a.T @ (a @ x - b))) <= 1e-10

    def test_zero_matrix_gives_minimum_norm_zero(self):
        x = least_squares(np.zeros((3, 2)), np.ones((3, 1)))
        assert not np.any(x)

    def test_row_mismatch(self):
        with pytest.raises(ShapeError):
            least_squares(np.ones((3, 2)), np.ones((4, 1)))


class TestSubspaceEqual:
    def test_rotation_invariance(self):
        rng = np.random.default_rng(8)
        u, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        assert subspace_equal(u, u @ q, 1e-10)

    def test_different_spans(self):
        e1 = np.eye(3)[:, :1]
        e2 = np.eye(3)[:, 1:2]
        assert not subspace_equal(e1, e2, 1e-8)

    def test_kalman_span_oracle(self):
        # span{B, AB} equals the orthonormalized stack for a 2-step system
        rng = np.random.default_rng(9)
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 1))
        kal = compact_svd(np.hstack([b, a @ b])).U
        other = compact_svd(np.hstack([a @ b, b])).U
        assert subspace_equal(kal, other, 1e-10)

    def test_rank_mismatch_is_false(self):
        u, _ = np.linalg.qr(np.random.default_rng(10).standard_normal((5, 3)))
        assert not subspace_equal(u, u[:, :2], 1e-8)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ArgumentError):
            subspace_equal(np.ones((3, 2)), np.eye(3)[:, :2], 1e-8)

    def test_empty_bases_equal(self):
        assert subspace_equal(np.zeros((4, 0)), np.zeros((4, 0)), 1e-12)
