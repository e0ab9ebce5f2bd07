"""Oracle and property tests for the dense linear algebra layer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobiprior.errors import InvalidInput, SingularGram
from jacobiprior.linalg import (
    gram,
    project_onto_design,
    spd_factor,
    spd_solve,
    sym_eig,
)


class TestGram:
    def test_ones_column(self):
        np.testing.assert_allclose(gram(np.ones((2, 1))), [[2.0]])

    def test_identity(self):
        np.testing.assert_allclose(gram(np.eye(3)), np.eye(3))

    def test_hand_multiplication(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(gram(X), [[10.0, 14.0], [14.0, 20.0]])

    def test_exact_symmetry(self, rng):
        X = rng.standard_normal((50, 7))
        G = gram(X)
        assert np.array_equal(G, G.T)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInput):
            gram(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestSpdSolve:
    def test_identity_solve(self):
        Z = spd_solve(np.eye(2), np.array([[3.0], [4.0]]))
        np.testing.assert_allclose(Z, [[3.0], [4.0]])

    def test_diagonal(self):
        Z = spd_solve(np.diag([2.0, 4.0]), np.array([[2.0], [8.0]]))
        np.testing.assert_allclose(Z, [[1.0], [2.0]])

    def test_two_by_two_inverse_by_hand(self):
        A = np.array([[4.0, 2.0], [2.0, 3.0]])
        Z = spd_solve(A, np.array([[10.0], [8.0]]))
        np.testing.assert_allclose(Z, [[1.75], [1.5]], atol=1e-12)

    def test_round_trip_random_spd(self, rng):
        for _ in range(10):
            M = rng.standard_normal((12, 6))
            A = M.T @ M + np.eye(6)
            B = rng.standard_normal((6, 3))
            Z = spd_solve(A, B)
            resid = np.linalg.norm(A @ Z - B)
            assert resid <= 1e-8 * np.linalg.norm(B)

    def test_jitter_recorded_for_rank_deficient(self):
        fact = spd_factor(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert fact.jitter_applied > 0

    def test_jitter_is_zero_for_clean_spd(self):
        fact = spd_factor(np.array([[2.0, 0.0], [0.0, 3.0]]))
        assert fact.jitter_applied == 0.0
        np.testing.assert_allclose(fact.factor @ fact.factor.T, np.diag([2.0, 3.0]))

    def test_indefinite_raises_singular_gram(self):
        # eigenvalues 3 and -1: no amount of tiny jitter makes this PD
        with pytest.raises(SingularGram):
            spd_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInput):
            spd_factor(np.array([[1.0, 0.5], [0.0, 1.0]]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31 - 1))
    def test_round_trip_property(self, p, seed):
        gen = np.random.default_rng(seed)
        M = gen.standard_normal((p + 3, p))
        A = M.T @ M + np.eye(p)
        B = gen.standard_normal((p, 2))
        Z = spd_solve(A, B)
        assert np.linalg.norm(A @ Z - B) <= 1e-8 * np.linalg.norm(B)


class TestProjection:
    def test_intercept_only_is_mean(self):
        B = project_onto_design(np.ones((4, 1)), np.array([1.0, 2.0, 3.0, 4.0]))
        np.testing.assert_allclose(B, [[2.5]])

    def test_identity_design(self, rng):
        t = rng.standard_normal((3, 1))
        np.testing.assert_allclose(project_onto_design(np.eye(3), t), t, atol=1e-12)

    def test_exact_line_fit(self):
        X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
        B = project_onto_design(X, np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(B, [[1.0], [1.0]], atol=1e-12)

    def test_row_mismatch_rejected(self, rng):
        with pytest.raises(InvalidInput):
            project_onto_design(np.ones((4, 1)), rng.standard_normal((5, 1)))

    def test_residual_orthogonality(self, rng):
        for _ in range(8):
            n = int(rng.integers(30, 200))
            p = int(rng.integers(2, 21))
            X = rng.standard_normal((n, p))
            T = rng.standard_normal((n, 3))
            B = project_onto_design(X, T)
            resid = X.T @ (T - X @ B)
            assert np.max(np.abs(resid)) <= 1e-6 * np.linalg.norm(T)


class TestSymEig:
    def test_diagonal(self):
        values, vectors = sym_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(values, [3.0, 1.0])
        # axis-aligned up to sign
        np.testing.assert_allclose(np.abs(vectors), np.eye(2), atol=1e-12)

    def test_characteristic_polynomial_by_hand(self):
        values, _ = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(values, [3.0, 1.0], atol=1e-12)

    def test_identity(self):
        values, _ = sym_eig(np.eye(4))
        np.testing.assert_allclose(values, np.ones(4))

    def test_descending_orthonormal_reconstruction(self, rng):
        M = rng.standard_normal((8, 8))
        A = M + M.T
        values, vectors = sym_eig(A)
        assert np.all(np.diff(values) <= 0)
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(8), atol=1e-8)
        recon = vectors @ np.diag(values) @ vectors.T
        assert np.linalg.norm(recon - A) <= 1e-7 * np.linalg.norm(A)
        scale = np.linalg.norm(A)
        for i in range(8):
            assert np.linalg.norm(A @ vectors[:, i] - values[i] * vectors[:, i]) <= 1e-7 * scale

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInput):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
