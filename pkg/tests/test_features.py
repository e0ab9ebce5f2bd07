"""PCA and standardizer tests."""

import numpy as np
import pytest

from jacobiprior.errors import InvalidInput
from jacobiprior.features import (
    apply_pca,
    apply_standardizer,
    fit_pca,
    fit_standardizer,
)


class TestFitPca:
    def test_rank_one_data_fully_explained_by_one_component(self, rng):
        t = rng.standard_normal(40)
        X = np.outer(t, [2.0, 1.0])
        proj = fit_pca(X, 1)
        assert proj.explained_variance_ratio == pytest.approx(1.0, abs=1e-12)

    def test_full_rank_ratio_is_one(self, rng):
        X = rng.standard_normal((30, 4))
        proj = fit_pca(X, 4)
        assert proj.explained_variance_ratio == pytest.approx(1.0, abs=1e-10)

    def test_isotropic_cloud_symmetry_oracle(self):
        X = np.random.default_rng(11).standard_normal((5000, 3))
        proj = fit_pca(X, 1)
        assert proj.explained_variance_ratio == pytest.approx(1 / 3, abs=0.05)

    def test_ratio_nondecreasing_in_d(self, rng):
        X = rng.standard_normal((60, 6))
        ratios = [fit_pca(X, d).explained_variance_ratio for d in range(1, 7)]
        assert all(ratios[i + 1] >= ratios[i] for i in range(5))
        assert np.all(np.diff(fit_pca(X, 6).explained_variance) <= 0)

    def test_components_orthonormal(self, rng):
        X = rng.standard_normal((40, 5))
        proj = fit_pca(X, 3)
        np.testing.assert_allclose(proj.components.T @ proj.components, np.eye(3),
                                   atol=1e-8)

    def test_sign_convention_deterministic(self, rng):
        X = rng.standard_normal((40, 5))
        proj = fit_pca(X, 3)
        for j in range(3):
            peak = np.argmax(np.abs(proj.components[:, j]))
            assert proj.components[peak, j] > 0

    @pytest.mark.parametrize("d", [0, -1, 99])
    def test_d_out_of_range(self, rng, d):
        with pytest.raises(InvalidInput):
            fit_pca(rng.standard_normal((20, 4)), d)


class TestApplyPca:
    def test_mean_replicated_maps_to_zero(self, rng):
        X = rng.standard_normal((25, 4))
        proj = fit_pca(X, 2)
        constant = np.tile(proj.mean, (7, 1))
        np.testing.assert_allclose(apply_pca(proj, constant), 0.0, atol=1e-10)

    def test_round_trip_at_full_dimension(self, rng):
        X = rng.standard_normal((30, 4))
        proj = fit_pca(X, 4)
        Z = apply_pca(proj, X)
        recon = Z @ proj.components.T + proj.mean
        np.testing.assert_allclose(recon, X, atol=1e-6)

    def test_projected_variances_equal_explained_variance(self, rng):
        X = rng.standard_normal((50, 6))
        proj = fit_pca(X, 4)
        Z = apply_pca(proj, X)
        np.testing.assert_allclose(Z.var(axis=0, ddof=1), proj.explained_variance,
                                   atol=1e-6)

    def test_dimension_mismatch(self, rng):
        proj = fit_pca(rng.standard_normal((20, 4)), 2)
        with pytest.raises(InvalidInput):
            apply_pca(proj, rng.standard_normal((5, 3)))


class TestStandardizer:
    def test_constant_column_centered_with_unit_scale(self):
        X = np.column_stack([np.full(5, 3.0), np.arange(5.0)])
        s = fit_standardizer(X)
        assert s.scale[0] == 1.0
        out = apply_standardizer(s, X)
        np.testing.assert_allclose(out[:, 0], 0.0, atol=1e-12)

    def test_already_standard_column_unchanged(self, rng):
        col = rng.standard_normal(200)
        col = (col - col.mean()) / col.std(ddof=1)
        X = col[:, None]
        out = apply_standardizer(fit_standardizer(X), X)
        np.testing.assert_allclose(out, X, atol=1e-8)

    def test_two_point_column_sample_convention(self):
        X = np.array([[0.0], [2.0]])
        out = apply_standardizer(fit_standardizer(X), X)
        np.testing.assert_allclose(out.ravel(), [-1 / np.sqrt(2), 1 / np.sqrt(2)],
                                   atol=1e-12)

    def test_output_moments(self, rng):
        X = rng.uniform(-4, 9, (40, 3))
        out = apply_standardizer(fit_standardizer(X), X)
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-8)
        np.testing.assert_allclose(out.var(axis=0, ddof=1), 1.0, atol=1e-8)

    def test_needs_two_rows(self):
        with pytest.raises(InvalidInput):
            fit_standardizer(np.ones((1, 3)))
