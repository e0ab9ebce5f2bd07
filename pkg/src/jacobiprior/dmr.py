"""The core classifier: closed-form multinomial regression on transformed counts.

Each of the K classes is treated as an independent count regression.  The
per-observation targets get the closed-form transform

    eta_ik = log(Y_ik + a) - log(1 + b),      a, b > 0,

and the coefficient matrix is the least-squares projection of those targets
onto the design's column space.  Fitting is a fixed number of matrix
operations; there is no convergence loop and deliberately no tolerance or
iteration-count parameter anywhere in the signatures.

For one-hot targets the fitted coefficients decompose exactly as

    coefficients = c(a, b) * v 1'  +  gamma(a) * w,

with c = log a - log(1+b), gamma = log((1+a)/a) > 0, v the projection of the
all-ones vector and w the projection of the one-hot target matrix.  The
c-term is class-independent and gamma is positive, so the argmax decision is
invariant to (a, b); ``decompose_invariance`` exposes the decomposition so
that invariance can be tested as an identity.

In the moderate-rate regime the log transform of a count carries a bias of
order -1/(2*rate); ``bias_correct`` applies the closed-form correction
``beta + 0.5 * (X'X)^-1 X' exp(-X beta)`` per class, again without iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import InvalidHyperparameter, InvalidInput, OverflowGuard
from .linalg import as_matrix, gram, spd_factor

# exp(-s) overflows double precision near s = -745; refuse well before that.
SCORE_OVERFLOW_LIMIT = -700.0


@dataclass(frozen=True)
class JacobiDmrModel:
    """Fitted classifier: a p x K coefficient matrix plus its prior settings.

    The coefficient matrix is the entire deployable artifact; prediction is
    K dot products against a feature vector.
    """

    coefficients: np.ndarray
    a: float
    b: float
    class_names: tuple[str, ...]

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=np.float64)
        if coef.ndim != 2:
            raise InvalidInput("coefficients must be a p x K matrix")
        if not np.all(np.isfinite(coef)):
            raise InvalidInput("coefficients contain non-finite entries")
        if coef.shape[1] < 2:
            raise InvalidInput("a classifier needs at least 2 classes")
        if not (self.a > 0 and self.b > 0):
            raise InvalidHyperparameter("prior hyperparameters a, b must be > 0")
        if len(self.class_names) != coef.shape[1]:
            raise InvalidInput("one class name per coefficient column required")
        object.__setattr__(self, "coefficients", np.ascontiguousarray(coef))
        object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))

    @property
    def p(self) -> int:
        return self.coefficients.shape[0]

    @property
    def num_classes(self) -> int:
        return self.coefficients.shape[1]


@dataclass(frozen=True)
class InvarianceDecomposition:
    """Exact split of fitted coefficients into a class-independent shift and
    a positively scaled class-informative part."""

    v: np.ndarray
    w: np.ndarray
    c: float
    gamma: float

    def reconstruct(self) -> np.ndarray:
        """c * v 1' + gamma * w, which equals the fitted coefficient matrix."""
        return self.c * self.v[:, None] + self.gamma * self.w


def _default_names(K: int) -> tuple[str, ...]:
    return tuple(f"class_{k}" for k in range(K))


def validate_labels(labels, K: int | None = None) -> tuple[np.ndarray, int]:
    """Check a label vector of class indices; return (labels, K)."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size == 0:
        raise InvalidInput("labels must be a non-empty 1-D sequence")
    if not np.issubdtype(lab.dtype, np.integer):
        try:
            as_int = lab.astype(np.int64)
            clean = np.array_equal(as_int, lab)
        except (TypeError, ValueError):
            clean = False
        if not clean:
            raise InvalidInput("labels must be integers")
        lab = as_int
    lab = lab.astype(np.int64)
    if lab.min() < 0:
        raise InvalidInput("labels must be nonnegative class indices")
    found = int(lab.max()) + 1
    if K is None:
        K = max(found, 2)
    elif found > K:
        raise InvalidInput(f"label {found - 1} out of range for {K} classes")
    return lab, K


def one_hot(labels, K: int | None = None) -> np.ndarray:
    """n x K 0/1 indicator matrix from a vector of class indices."""
    lab, K = validate_labels(labels, K)
    out = np.zeros((lab.shape[0], K), dtype=np.int64)
    out[np.arange(lab.shape[0]), lab] = 1
    return out


def transform_targets(Y, a: float, b: float) -> np.ndarray:
    """log(Y + a) - log(1 + b) entrywise, for a nonnegative integer count matrix."""
    if not (a > 0):
        raise InvalidHyperparameter(f"a must be > 0, got {a} (log(0 + a) undefined at a = 0)")
    if not (b > 0):
        raise InvalidHyperparameter(f"b must be > 0, got {b}")
    Ym = np.asarray(Y, dtype=np.float64)
    if Ym.ndim != 2:
        raise InvalidInput("counts must be an n x K matrix")
    if not np.all(np.isfinite(Ym)) or np.any(Ym < 0) or np.any(Ym != np.floor(Ym)):
        raise InvalidInput("counts must be nonnegative integers")
    return np.log(Ym + a) - np.log(1.0 + b)


def fit_counts(X, Y, a: float | None = None, b: float | None = None,
               class_names=None) -> JacobiDmrModel:
    """Fit directly on an n x K count matrix (the count-regression view).

    Counts above 1 are legitimate here; classification data is the one-hot
    special case handled by ``fit``.
    """
    Xm = as_matrix(X, "X")
    Ym = np.asarray(Y)
    if Ym.ndim != 2:
        raise InvalidInput("counts must be an n x K matrix")
    n, p = Xm.shape
    if Ym.shape[0] != n:
        raise InvalidInput(f"counts have {Ym.shape[0]} rows but X has {n}")
    if Ym.shape[1] < 2:
        raise InvalidInput("a classifier needs at least 2 classes")
    if n < p:
        raise InvalidInput(f"need at least as many rows as columns (n={n}, p={p})")
    if a is None:
        a = 1.0 / n
    if b is None:
        b = 1.0 / n
    eta = transform_targets(Ym, a, b)
    fact = spd_factor(gram(Xm))
    coef = fact.solve(backend.crossprod(Xm, eta))
    names = _default_names(Ym.shape[1]) if class_names is None else tuple(class_names)
    return JacobiDmrModel(coefficients=coef, a=float(a), b=float(b), class_names=names)


def fit(X, labels, a: float | None = None, b: float | None = None,
        class_names=None) -> JacobiDmrModel:
    """Fit from integer class labels.

    Defaults a = b = 1/n when unspecified.  One-hot encodes the labels,
    transforms, projects; the whole fit is non-iterative.
    """
    K = len(class_names) if class_names is not None else None
    Y = one_hot(labels, K)
    return fit_counts(X, Y, a=a, b=b, class_names=class_names)


def _check_vector(model: JacobiDmrModel, x) -> np.ndarray:
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.shape[0] != model.p:
        raise InvalidInput(f"feature vector has length {xv.shape[0]}, model expects {model.p}")
    if not np.all(np.isfinite(xv)):
        raise InvalidInput("feature vector contains non-finite entries")
    return xv


def predict_scores(model: JacobiDmrModel, x) -> np.ndarray:
    """The K linear scores x' beta_k (log scale; exp is monotone, so these
    suffice for classification)."""
    xv = _check_vector(model, x)
    return backend.matmul(np.ascontiguousarray(xv[None, :]), model.coefficients)[0]


def decision_scores(model: JacobiDmrModel, X) -> np.ndarray:
    """Linear scores for every row of X; shape n x K."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != model.p:
        raise InvalidInput(f"X has {Xm.shape[1]} columns, model expects {model.p}")
    return backend.matmul(Xm, model.coefficients)


def predict_class(model: JacobiDmrModel, x) -> int:
    """Argmax of the scores; ties go to the lowest class index."""
    return int(np.argmax(predict_scores(model, x)))


def predict_classes(model: JacobiDmrModel, X) -> np.ndarray:
    """Predicted class index for every row of X."""
    return np.argmax(decision_scores(model, X), axis=1)


def bias_correct(model: JacobiDmrModel, X) -> JacobiDmrModel:
    """Closed-form moderate-rate correction: beta + 0.5 (X'X)^-1 X' exp(-X beta).

    X must be the matrix the model was fitted on.  No iteration: one matrix
    of exponentials, one projection.
    """
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != model.p:
        raise InvalidInput(f"X has {Xm.shape[1]} columns, model expects {model.p}")
    scores = backend.matmul(Xm, model.coefficients)
    low = np.min(scores)
    if low < SCORE_OVERFLOW_LIMIT:
        row = int(np.argmin(np.min(scores, axis=1)))
        raise OverflowGuard(
            f"exp(-x'beta) would overflow at row {row} (score {low:.1f} < {SCORE_OVERFLOW_LIMIT})"
        )
    fact = spd_factor(gram(Xm))
    correction = 0.5 * fact.solve(backend.crossprod(Xm, np.exp(-scores)))
    return JacobiDmrModel(
        coefficients=model.coefficients + correction,
        a=model.a,
        b=model.b,
        class_names=model.class_names,
    )


def decompose_invariance(X, labels, a: float, b: float) -> InvarianceDecomposition:
    """The exact (v, w, c, gamma) split of a one-hot fit's coefficients."""
    if not (a > 0) or not (b > 0):
        raise InvalidHyperparameter("prior hyperparameters a, b must be > 0")
    Xm = as_matrix(X, "X")
    Y = one_hot(labels).astype(np.float64)
    if Y.shape[0] != Xm.shape[0]:
        raise InvalidInput("labels and X disagree on the number of rows")
    fact = spd_factor(gram(Xm))
    ones = np.ones((Xm.shape[0], 1))
    v = fact.solve(backend.crossprod(Xm, ones))[:, 0]
    w = fact.solve(backend.crossprod(Xm, np.ascontiguousarray(Y)))
    c = float(np.log(a) - np.log(1.0 + b))
    gamma = float(np.log(1.0 + a) - np.log(a))
    return InvarianceDecomposition(v=v, w=w, c=c, gamma=gamma)
