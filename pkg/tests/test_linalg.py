import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taperdyn import (
    ConditioningError,
    RngStream,
    ShapeError,
    eig,
    make_weight_vector,
    pinv_lstsq,
    sym_sqrt_inv,
    uniform_weight_vector,
    weighted_pair,
)
from taperdyn.weights import exponential_bump


@pytest.fixture
def gen():
    return RngStream(77, "linalg").generator()


class TestWeightedPair:
    def test_identity_weights_change_nothing(self, gen):
        M = gen.standard_normal((3, 6))
        out = weighted_pair(M, np.ones(6), axis=1)
        np.testing.assert_array_equal(out, M)

    def test_last_sample_only(self, gen):
        M = gen.standard_normal((3, 5))
        out = weighted_pair(M, np.array([0.0, 0, 0, 0, 1.0]), axis=1)
        np.testing.assert_array_equal(out[:, :4], 0.0)
        np.testing.assert_array_equal(out[:, 4], M[:, 4])

    def test_twice_equals_diag_scaling(self, gen):
        M = gen.standard_normal((4, 7))
        diag = gen.uniform(0.1, 2.0, 7)
        twice = weighted_pair(weighted_pair(M, diag, axis=1), diag, axis=1)
        np.testing.assert_allclose(twice, M * diag[None, :], rtol=1e-14)

    def test_accepts_weight_vector(self, gen):
        M = gen.standard_normal((8, 3))
        wv = make_weight_vector(8, exponential_bump())
        out = weighted_pair(M, wv, axis=0)
        np.testing.assert_allclose(out, M * np.sqrt(wv.raw)[:, None], rtol=1e-15)

    def test_shape_error(self, gen):
        with pytest.raises(ShapeError):
            weighted_pair(gen.standard_normal((3, 5)), np.ones(4), axis=1)


class TestPinvLstsq:
    def test_exact_consistency_square(self, gen):
        A = gen.standard_normal((4, 4)) + 4.0 * np.eye(4)
        C = gen.standard_normal((4, 4))
        B = C @ A
        sol = pinv_lstsq(A, B, fit="left")
        np.testing.assert_allclose(sol.matrix, C, rtol=1e-10)
        assert sol.effective_rank == 4

    def test_zero_rhs(self, gen):
        A = gen.standard_normal((3, 8))
        sol = pinv_lstsq(A, np.zeros((2, 8)), fit="left")
        np.testing.assert_allclose(sol.matrix, 0.0, atol=1e-14)

    def test_zero_matrix_is_not_an_error(self):
        sol = pinv_lstsq(np.zeros((3, 5)), np.ones((2, 5)), fit="left")
        assert sol.effective_rank == 0
        np.testing.assert_array_equal(sol.matrix, np.zeros((2, 3)))

    def test_rank_one_closed_form(self, gen):
        # A = u v^T, B = w v^T: minimal-norm K = w u^T / |u|^2
        u = gen.standard_normal(3)
        v = gen.standard_normal(7)
        w = gen.standard_normal(2)
        A = np.outer(u, v)
        B = np.outer(w, v)
        sol = pinv_lstsq(A, B, fit="left")
        np.testing.assert_allclose(sol.matrix, np.outer(w, u) / (u @ u), rtol=1e-10)
        assert sol.effective_rank == 1

    @given(m=st.integers(2, 6), n=st.integers(2, 6), seed=st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_normal_equations_oracle(self, m, n, seed):
        # independent oracle: dense normal equations on full-row-rank systems
        g = np.random.default_rng(seed)
        A = g.standard_normal((m, n)) + 1j * g.standard_normal((m, n))
        B = g.standard_normal((3, n)) + 1j * g.standard_normal((3, n))
        if m > n:
            return  # oracle needs full row rank
        K = pinv_lstsq(A, B, fit="left").matrix
        gram = A @ A.conj().T
        if np.linalg.cond(gram) > 1e6:
            return
        K_ref = B @ A.conj().T @ np.linalg.inv(gram)
        np.testing.assert_allclose(K, K_ref, rtol=1e-8, atol=1e-10)

    def test_right_convention(self, gen):
        A = gen.standard_normal((10, 4))
        K_true = gen.standard_normal((4, 2))
        B = A @ K_true
        sol = pinv_lstsq(A, B, fit="right")
        np.testing.assert_allclose(sol.matrix, K_true, rtol=1e-10)

    def test_conventions_are_transposes(self, gen):
        A = gen.standard_normal((5, 9))
        B = gen.standard_normal((2, 9))
        left = pinv_lstsq(A, B, fit="left").matrix
        right = pinv_lstsq(A.T, B.T, fit="right").matrix
        np.testing.assert_allclose(left, right.T, rtol=1e-12)

    def test_truncation(self, gen):
        U, _ = np.linalg.qr(gen.standard_normal((6, 6)))
        V, _ = np.linalg.qr(gen.standard_normal((6, 6)))
        A = U @ np.diag([1.0, 0.5, 0.1, 1e-14, 1e-15, 0.0]) @ V.T
        sol = pinv_lstsq(A, np.eye(6), rel_tol=1e-10, fit="left")
        assert sol.effective_rank == 3

    def test_bad_args(self, gen):
        A = gen.standard_normal((3, 5))
        with pytest.raises(ShapeError):
            pinv_lstsq(A, np.ones((2, 4)), fit="left")
        with pytest.raises(ShapeError):
            pinv_lstsq(A, np.ones((2, 5)), rel_tol=2.0)
        with pytest.raises(ShapeError):
            pinv_lstsq(A, np.ones((2, 5)), fit="sideways")


class TestEig:
    def test_identity(self):
        values, _ = eig(np.eye(4))
        np.testing.assert_allclose(values, np.ones(4))

    def test_rotation_closed_form(self):
        alpha = 0.8
        R = np.array([[math.cos(alpha), -math.sin(alpha)],
                      [math.sin(alpha), math.cos(alpha)]])
        values, vectors = eig(R)
        expected = np.array([np.exp(1j * alpha), np.exp(-1j * alpha)])
        np.testing.assert_allclose(values, expected, atol=1e-12)
        np.testing.assert_allclose(R @ vectors, vectors @ np.diag(values), atol=1e-12)

    def test_tie_breaking_order(self):
        values, _ = eig(np.diag([1.0, -1.0, 2.0j, -2.0]))
        np.testing.assert_allclose(values, [2.0j, -2.0, 1.0, -1.0], atol=1e-14)

    def test_hermitian_real_eigenvalues(self, gen):
        H = gen.standard_normal((5, 5))
        H = H + H.T
        values, _ = eig(H)
        assert np.max(np.abs(values.imag)) <= 1e-10

    def test_residual_bound(self, gen):
        A = gen.standard_normal((6, 6))
        values, vectors = eig(A)
        resid = np.linalg.norm(A @ vectors - vectors @ np.diag(values))
        assert resid <= 1e-10 * np.linalg.norm(A) * 100

    def test_deterministic(self, gen):
        A = gen.standard_normal((5, 5))
        v1, _ = eig(A)
        v2, _ = eig(A)
        np.testing.assert_array_equal(v1, v2)

    def test_non_square(self):
        with pytest.raises(ShapeError):
            eig(np.ones((2, 3)))


class TestSymSqrtInv:
    def test_identity(self):
        half, inv_half = sym_sqrt_inv(np.eye(3))
        np.testing.assert_allclose(half, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(inv_half, np.eye(3), atol=1e-14)

    def test_diagonal(self):
        half, inv_half = sym_sqrt_inv(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(half, np.diag([2.0, 3.0]), atol=1e-14)
        np.testing.assert_allclose(inv_half, np.diag([0.5, 1.0 / 3.0]), atol=1e-14)

    def test_random_spd_roundtrip(self, gen):
        M = gen.standard_normal((5, 5))
        G = M.T @ M + 0.5 * np.eye(5)
        half, inv_half = sym_sqrt_inv(G)
        np.testing.assert_allclose(half @ half, G, rtol=1e-9)
        np.testing.assert_allclose(inv_half @ G @ inv_half, np.eye(5), atol=1e-9)

    def test_complex_hermitian(self, gen):
        M = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
        G = M.conj().T @ M + np.eye(4)
        half, inv_half = sym_sqrt_inv(G)
        np.testing.assert_allclose(half @ half, G, rtol=1e-9)

    def test_rejects_non_hermitian(self, gen):
        with pytest.raises(ShapeError):
            sym_sqrt_inv(gen.standard_normal((3, 3)))

    def test_rejects_indefinite_with_ratio(self):
        with pytest.raises(ConditioningError, match="ratio"):
            sym_sqrt_inv(np.diag([1.0, -0.5]))

    def test_rejects_ill_conditioned(self):
        with pytest.raises(ConditioningError):
            sym_sqrt_inv(np.diag([1.0, 1e-15]), rel_tol=1e-12)
