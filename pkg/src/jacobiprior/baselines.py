"""Closed-form ridge baseline: one-vs-all regression on one-hot targets.

Features are standardized at fit time and the standardizer is stored on the
model, because the same scaling must be replayed at prediction; that stored
state is exactly what the projection classifier avoids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .dmr import one_hot
from .errors import InvalidInput
from .features import Standardizer, apply_standardizer, fit_standardizer
from .linalg import as_matrix, gram, spd_factor


@dataclass(frozen=True)
class RidgeModel:
    coefficients: np.ndarray
    intercepts: np.ndarray
    alpha: float
    standardizer: Standardizer
    class_names: tuple[str, ...]

    @property
    def p(self) -> int:
        return self.coefficients.shape[0]

    @property
    def num_classes(self) -> int:
        return self.coefficients.shape[1]


def fit_ridge(X, labels, alpha: float = 1.0, class_names=None) -> RidgeModel:
    """Solve (X'X + alpha I) beta = X'y per class on standardized features."""
    if not (alpha > 0):
        raise InvalidInput(f"alpha must be positive, got {alpha}")
    Xm = as_matrix(X, "X")
    if Xm.shape[0] < 2:
        raise InvalidInput("ridge fitting needs at least 2 rows")
    K = len(class_names) if class_names is not None else None
    Y = one_hot(labels, K).astype(np.float64)
    if Y.shape[0] != Xm.shape[0]:
        raise InvalidInput("labels and X disagree on the number of rows")

    std = fit_standardizer(Xm)
    Xs = np.ascontiguousarray(apply_standardizer(std, Xm))
    G = gram(Xs) + alpha * np.eye(Xs.shape[1])
    fact = spd_factor(G)
    coef = fact.solve(backend.crossprod(Xs, np.ascontiguousarray(Y)))
    # fit is on centered features, so the intercept restores the class mean
    col_means = Xs.mean(axis=0)
    intercepts = Y.mean(axis=0) - col_means @ coef
    names = class_names if class_names is not None else tuple(
        f"class_{k}" for k in range(Y.shape[1])
    )
    return RidgeModel(
        coefficients=coef, intercepts=intercepts, alpha=float(alpha),
        standardizer=std, class_names=tuple(names),
    )


def ridge_scores(model: RidgeModel, X) -> np.ndarray:
    """Standardize, then linear scores plus intercepts; shape n x K."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != model.p:
        raise InvalidInput(f"X has {Xm.shape[1]} columns, model expects {model.p}")
    Xs = np.ascontiguousarray(apply_standardizer(model.standardizer, Xm))
    return backend.matmul(Xs, model.coefficients) + model.intercepts


def predict_ridge(model: RidgeModel, x) -> int:
    """Argmax of the one-vs-all scores; lowest index wins ties."""
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.shape[0] != model.p:
        raise InvalidInput(f"feature vector has length {xv.shape[0]}, model expects {model.p}")
    if not np.all(np.isfinite(xv)):
        raise InvalidInput("feature vector contains non-finite entries")
    return int(np.argmax(ridge_scores(model, xv[None, :])[0]))


def predict_ridge_classes(model: RidgeModel, X) -> np.ndarray:
    return np.argmax(ridge_scores(model, X), axis=1)
