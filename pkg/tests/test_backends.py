"""Parity between the compiled kernels and the NumPy fallback, plus
independent oracles for the Poisson inversion kernel."""

import numpy as np
import pytest
import scipy.stats

from jacobiprior import backend

BACKENDS = backend.available_backends()
PAIRED = len(BACKENDS) == 2


def _modules():
    return [backend.backend_module(name) for name in BACKENDS]


@pytest.mark.skipif(not PAIRED, reason="compiled extension not built")
class TestBackendParity:
    def setup_method(self):
        self.rng = np.random.default_rng(99)

    def test_gram(self):
        X = self.rng.standard_normal((40, 7))
        a, b = (m.gram(X) for m in _modules())
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_crossprod(self):
        X = self.rng.standard_normal((40, 7))
        T = self.rng.standard_normal((40, 3))
        a, b = (m.crossprod(X, T) for m in _modules())
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_matmul(self):
        A = self.rng.standard_normal((9, 5))
        B = self.rng.standard_normal((5, 4))
        a, b = (m.matmul(A, B) for m in _modules())
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_cholesky_and_solve(self):
        M = self.rng.standard_normal((12, 6))
        A = M.T @ M + np.eye(6)
        B = self.rng.standard_normal((6, 2))
        for mod in _modules():
            L = mod.cholesky(A)
            np.testing.assert_allclose(np.triu(L, 1), 0.0, atol=1e-14)
            np.testing.assert_allclose(L @ L.T, A, rtol=1e-10, atol=1e-10)
            Z = mod.solve_cholesky(L, B)
            np.testing.assert_allclose(A @ Z, B, rtol=1e-8, atol=1e-10)
        La, Lb = (m.cholesky(A) for m in _modules())
        np.testing.assert_allclose(La, Lb, rtol=1e-10, atol=1e-12)

    def test_cholesky_rejects_non_pd(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])
        for mod in _modules():
            with pytest.raises(np.linalg.LinAlgError):
                mod.cholesky(bad)

    def test_rbf(self):
        A = self.rng.standard_normal((11, 4))
        B = self.rng.standard_normal((7, 4))
        a, b = (m.rbf_matrix(A, B, 1.3, 2.0) for m in _modules())
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
        sa, sb = (m.rbf_matrix_sym(A, 1.3, 2.0) for m in _modules())
        np.testing.assert_allclose(sa, sb, rtol=1e-10, atol=1e-12)
        for s in (sa, sb):
            assert np.array_equal(s, s.T)
            np.testing.assert_allclose(np.diag(s), 2.0)


class TestPoissonInversion:
    """The inversion kernel must agree with the Poisson quantile function."""

    @pytest.mark.parametrize("name", BACKENDS)
    def test_matches_scipy_ppf(self, name):
        mod = backend.backend_module(name)
        gen = np.random.default_rng(4321)
        lam = gen.uniform(0.05, 29.0, 300)
        u = gen.random(300)
        got = mod.poisson_inversion(np.ascontiguousarray(lam), np.ascontiguousarray(u))
        expected = scipy.stats.poisson.ppf(u, lam).astype(np.int64)
        np.testing.assert_array_equal(got, expected)

    @pytest.mark.parametrize("name", BACKENDS)
    def test_deterministic(self, name):
        mod = backend.backend_module(name)
        lam = np.full(64, 3.5)
        u = np.random.default_rng(5).random(64)
        first = mod.poisson_inversion(lam, u)
        second = mod.poisson_inversion(lam, u)
        np.testing.assert_array_equal(first, second)

    @pytest.mark.parametrize("name", BACKENDS)
    def test_extreme_uniforms(self, name):
        mod = backend.backend_module(name)
        lam = np.array([0.5, 5.0, 25.0])
        low = mod.poisson_inversion(lam, np.zeros(3))
        np.testing.assert_array_equal(low, [0, 0, 0])
        high = mod.poisson_inversion(lam, np.full(3, 1.0 - 1e-12))
        assert np.all(high > lam)  # far right tail
