"""Oracle tests for the closed-form classifier: transform, fit, prediction,
bias correction, and the invariance decomposition."""

import inspect
import math

import numpy as np
import pytest

from jacobiprior.dmr import (
    JacobiDmrModel,
    bias_correct,
    decompose_invariance,
    fit,
    fit_counts,
    one_hot,
    predict_class,
    predict_classes,
    predict_scores,
    transform_targets,
)
from jacobiprior.errors import InvalidHyperparameter, InvalidInput, OverflowGuard

LOG2 = math.log(2.0)


class TestTransformTargets:
    def test_equal_hyperparameters_zero_at_count_one(self):
        out = transform_targets(np.array([[1]]), a=0.0005, b=0.0005)
        assert out[0, 0] == 0.0

    def test_count_zero_unit_prior(self):
        out = transform_targets(np.array([[0]]), a=1.0, b=1e-12)
        assert out[0, 0] == pytest.approx(0.0, abs=1e-11)

    def test_scalar_evaluation(self):
        out = transform_targets(np.array([[0]]), a=1 / 2000, b=1 / 2000)
        assert out[0, 0] == pytest.approx(-7.6014, abs=1e-4)

    def test_formula_entrywise(self, rng):
        Y = rng.integers(0, 6, (5, 3))
        a, b = 0.3, 0.8
        expected = np.log(Y + a) - np.log(1 + b)
        np.testing.assert_allclose(transform_targets(Y, a, b), expected)

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -2.0)])
    def test_nonpositive_hyperparameters_rejected(self, a, b):
        with pytest.raises(InvalidHyperparameter):
            transform_targets(np.array([[1]]), a, b)

    def test_bad_counts_rejected(self):
        with pytest.raises(InvalidInput):
            transform_targets(np.array([[-1, 0]]), 1.0, 1.0)
        with pytest.raises(InvalidInput):
            transform_targets(np.array([[0.5, 0]]), 1.0, 1.0)


class TestFit:
    def test_intercept_only_oracle(self):
        model = fit(np.ones((4, 1)), [0, 0, 1, 2], a=1.0, b=1.0)
        np.testing.assert_allclose(
            model.coefficients.ravel(),
            [-LOG2 / 2, -0.75 * LOG2, -0.75 * LOG2],
            atol=1e-12,
        )
        assert predict_class(model, [1.0]) == 0

    def test_identity_design_interpolates(self):
        X = np.eye(3)
        model = fit(X, [0, 1, 2], a=0.37, b=0.37)
        for i in range(3):
            assert predict_class(model, X[i]) == i

    def test_default_hyperparameters_are_one_over_n(self):
        model = fit(np.ones((8, 1)), [0, 1] * 4)
        assert model.a == pytest.approx(1 / 8)
        assert model.b == pytest.approx(1 / 8)

    def test_counts_above_one_accepted(self, rng):
        Y = rng.poisson(3.0, (20, 2))
        model = fit_counts(rng.standard_normal((20, 2)), Y, a=0.1, b=0.1)
        assert model.coefficients.shape == (2, 2)

    def test_label_out_of_range(self):
        with pytest.raises(InvalidInput):
            fit(np.ones((4, 1)), [0, 1, 3, 1], class_names=("a", "b"))

    def test_more_columns_than_rows_rejected(self, rng):
        with pytest.raises(InvalidInput):
            fit(rng.standard_normal((3, 5)), [0, 1, 0])

    def test_no_convergence_knobs_in_signature(self):
        # the fit is a fixed number of matrix operations, so nothing like a
        # tolerance or an iteration cap can appear in its signature
        for fn in (fit, fit_counts):
            names = set(inspect.signature(fn).parameters)
            assert not names & {"tol", "tolerance", "max_iter", "maxiter", "n_iter"}


class TestPrediction:
    def _zero_model(self, p=4, K=3):
        return JacobiDmrModel(
            coefficients=np.zeros((p, K)), a=1.0, b=1.0,
            class_names=tuple(f"c{k}" for k in range(K)),
        )

    def test_zero_model_scores(self):
        model = self._zero_model()
        np.testing.assert_allclose(predict_scores(model, np.ones(4)), np.zeros(3))

    def test_zero_model_tie_breaks_to_lowest_index(self):
        assert predict_class(self._zero_model(), np.ones(4)) == 0

    def test_basis_vector_extracts_coefficient_row(self, rng):
        coef = rng.standard_normal((5, 3))
        model = JacobiDmrModel(coefficients=coef, a=1.0, b=1.0,
                               class_names=("x", "y", "z"))
        for j in range(5):
            e = np.zeros(5)
            e[j] = 1.0
            np.testing.assert_allclose(predict_scores(model, e), coef[j], atol=1e-12)

    def test_intercept_only_scores_carry_forward(self):
        model = fit(np.ones((4, 1)), [0, 0, 1, 2], a=1.0, b=1.0)
        np.testing.assert_allclose(
            predict_scores(model, [1.0]),
            [-LOG2 / 2, -0.75 * LOG2, -0.75 * LOG2],
            atol=1e-12,
        )

    def test_length_mismatch(self):
        with pytest.raises(InvalidInput):
            predict_scores(self._zero_model(p=4), np.ones(3))

    def test_batch_matches_single(self, rng):
        X, labels = rng.standard_normal((40, 3)), rng.integers(0, 3, 40)
        model = fit(X, labels)
        batch = predict_classes(model, X)
        single = [predict_class(model, X[i]) for i in range(40)]
        np.testing.assert_array_equal(batch, single)

    def test_majority_class_dominance_intercept_only(self, rng):
        # with an all-ones design the prediction is always the majority class
        for _ in range(10):
            counts = rng.integers(1, 30, 3)
            labels = np.repeat([0, 1, 2], counts)
            model = fit(np.ones((labels.size, 1)), labels)
            majority = int(np.argmax(counts))
            assert predict_class(model, [1.0]) == majority


class TestBiasCorrect:
    def test_zero_intercept_model(self):
        X = np.ones((6, 1))
        model = JacobiDmrModel(coefficients=np.zeros((1, 2)), a=1.0, b=1.0,
                               class_names=("a", "b"))
        corrected = bias_correct(model, X)
        np.testing.assert_allclose(corrected.coefficients, 0.5, atol=1e-12)

    def test_log2_intercept_model(self):
        X = np.ones((5, 1))
        model = JacobiDmrModel(coefficients=np.full((1, 2), LOG2), a=1.0, b=1.0,
                               class_names=("a", "b"))
        corrected = bias_correct(model, X)
        np.testing.assert_allclose(corrected.coefficients, LOG2 + 0.25, atol=1e-12)

    def test_orthonormal_columns_brute_force(self, rng):
        # with X'X = I and beta = 0 the correction is half the column sums
        Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        model = JacobiDmrModel(coefficients=np.zeros((2, 2)), a=1.0, b=1.0,
                               class_names=("a", "b"))
        corrected = bias_correct(model, Q)
        expected = 0.5 * Q.T @ np.ones(5)
        for k in range(2):
            np.testing.assert_allclose(corrected.coefficients[:, k], expected, atol=1e-10)

    def test_overflow_guard_names_row(self):
        X = np.ones((3, 1))
        model = JacobiDmrModel(coefficients=np.array([[-800.0, 0.0]]), a=1.0, b=1.0,
                               class_names=("a", "b"))
        with pytest.raises(OverflowGuard, match="row 0"):
            bias_correct(model, X)

    def test_dimension_mismatch(self, rng):
        model = fit(rng.standard_normal((10, 2)), rng.integers(0, 2, 10))
        with pytest.raises(InvalidInput):
            bias_correct(model, rng.standard_normal((10, 3)))


class TestInvarianceDecomposition:
    def test_gamma_at_one_is_log2(self):
        d = decompose_invariance(np.ones((4, 1)), [0, 1, 0, 1], a=1.0, b=1.0)
        assert d.gamma == pytest.approx(LOG2)
        assert d.gamma > 0

    def test_v_for_intercept_design_is_one(self):
        d = decompose_invariance(np.ones((6, 1)), [0, 1] * 3, a=0.2, b=0.4)
        np.testing.assert_allclose(d.v, [1.0], atol=1e-12)

    def test_reconstruction_matches_fit(self, rng):
        X = rng.standard_normal((50, 4))
        labels = rng.integers(0, 3, 50)
        a = b = 0.0005
        model = fit(X, labels, a=a, b=b)
        d = decompose_invariance(X, labels, a=a, b=b)
        assert np.max(np.abs(d.reconstruct() - model.coefficients)) <= 1e-10

    def test_identity_over_random_instances(self, rng):
        for _ in range(6):
            n = int(rng.integers(10, 200))
            p = int(rng.integers(1, 11))
            K = int(rng.integers(2, 5))
            n = max(n, p)
            X = rng.standard_normal((n, p))
            labels = rng.integers(0, K, n)
            a = float(rng.uniform(0.001, 1.0))
            b = float(rng.uniform(0.001, 1.0))
            model = fit(X, labels, a=a, b=b, class_names=[f"c{k}" for k in range(K)])
            d = decompose_invariance(X, labels, a=a, b=b)
            assert np.max(np.abs(d.reconstruct() - model.coefficients)) <= 1e-10

    def test_argmax_invariance_between_hyperparameter_pairs(self, rng):
        X = rng.standard_normal((120, 5))
        labels = rng.integers(0, 3, 120)
        eval_X = rng.standard_normal((80, 5))
        reference = None
        for a, b in [(1 / 2000, 1 / 2000), (0.05, 0.9), (1.0, 0.01), (0.3, 0.3)]:
            preds = predict_classes(fit(X, labels, a=a, b=b), eval_X)
            if reference is None:
                reference = preds
            np.testing.assert_array_equal(preds, reference)


def test_one_hot_round_trip(rng):
    labels = rng.integers(0, 4, 25)
    Y = one_hot(labels, 4)
    assert Y.shape == (25, 4)
    np.testing.assert_array_equal(Y.sum(axis=1), 1)
    np.testing.assert_array_equal(np.argmax(Y, axis=1), labels)
