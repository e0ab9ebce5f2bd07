"""Nonlinear upper-bound classifier: exact GP regression on transformed targets.

One squared-exponential GP regression per class, fitted to the same
log-count targets the linear classifier uses.  Targets are centered per
class and the mean added back at prediction, so the GP itself is zero-mean.
Hyperparameters default to tuning-free choices: median-heuristic length
scale, target variance as signal variance, and a tiny noise floor.

The model stores the full training matrix, so memory and per-prediction
cost grow linearly with the training size; that trade-off is inherent to
exact GP inference and is the reason the linear model is the deployable one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .dmr import one_hot, transform_targets
from .errors import InvalidInput, SingularGram
from .linalg import as_matrix, spd_factor

NOISE_ESCALATION_RETRIES = 3
DEFAULT_NOISE_FRACTION = 1e-6
MEDIAN_HEURISTIC_CAP = 500


@dataclass(frozen=True)
class JacobiGpModel:
    """Stored training features plus per-class dual weights.

    ``alphas`` solves (K + noise_var I) alpha_k = centered target column k,
    where K is the training kernel matrix.
    """

    train_X: np.ndarray
    alphas: np.ndarray
    length_scale: float
    signal_var: float
    noise_var: float
    a: float
    b: float
    class_names: tuple[str, ...]
    target_means: np.ndarray

    @property
    def n_train(self) -> int:
        return self.train_X.shape[0]

    @property
    def p(self) -> int:
        return self.train_X.shape[1]

    @property
    def num_classes(self) -> int:
        return self.alphas.shape[1]


def rbf_kernel(x1, x2, length_scale: float, signal_var: float) -> float:
    """signal_var * exp(-||x1 - x2||^2 / (2 length_scale^2)) for two vectors."""
    a = np.asarray(x1, dtype=np.float64).ravel()
    b = np.asarray(x2, dtype=np.float64).ravel()
    if a.shape[0] != b.shape[0]:
        raise InvalidInput("kernel inputs must have equal length")
    if not (length_scale > 0 and signal_var > 0):
        raise InvalidInput("kernel hyperparameters must be positive")
    out = backend.rbf_matrix(
        np.ascontiguousarray(a[None, :]), np.ascontiguousarray(b[None, :]),
        float(length_scale), float(signal_var),
    )
    return float(out[0, 0])


def median_pairwise_distance(X, cap: int = MEDIAN_HEURISTIC_CAP) -> float:
    """Median pairwise distance on a deterministic subsample of at most cap rows."""
    Xm = as_matrix(X, "X")
    n = Xm.shape[0]
    stride = max(1, -(-n // cap))  # ceil(n / cap)
    sub = Xm[::stride][:cap]
    diff2 = (
        np.sum(sub * sub, axis=1)[:, None]
        + np.sum(sub * sub, axis=1)[None, :]
        - 2.0 * (sub @ sub.T)
    )
    iu = np.triu_indices(sub.shape[0], k=1)
    dists = np.sqrt(np.maximum(diff2[iu], 0.0))
    med = float(np.median(dists)) if dists.size else 0.0
    return med if med > 0 else 1.0


def fit_gp(X, labels, a: float | None = None, b: float | None = None,
           length_scale: float | None = None, signal_var: float | None = None,
           noise_var: float | None = None, class_names=None) -> JacobiGpModel:
    """Fit one GP regression per class on the transformed one-hot targets.

    If the kernel system is numerically singular at the requested noise
    level, the noise variance is escalated by 10x up to 3 times before
    giving up.
    """
    Xm = as_matrix(X, "X")
    n = Xm.shape[0]
    if n < 2:
        raise InvalidInput("GP fitting needs at least 2 rows")
    K_classes = len(class_names) if class_names is not None else None
    Y = one_hot(labels, K_classes)
    if Y.shape[0] != n:
        raise InvalidInput("labels and X disagree on the number of rows")
    if a is None:
        a = 1.0 / n
    if b is None:
        b = 1.0 / n
    for value, name in ((length_scale, "length_scale"), (signal_var, "signal_var"),
                        (noise_var, "noise_var")):
        if value is not None and not (value > 0):
            raise InvalidInput(f"{name} must be positive, got {value}")

    eta = transform_targets(Y, a, b)
    mu = eta.mean(axis=0)
    eta_c = np.ascontiguousarray(eta - mu)

    ls = float(length_scale) if length_scale is not None else median_pairwise_distance(Xm)
    sv = float(signal_var) if signal_var is not None else float(np.var(eta))
    if sv <= 0:
        sv = 1.0
    nv = float(noise_var) if noise_var is not None else DEFAULT_NOISE_FRACTION * sv

    kernel = backend.rbf_matrix_sym(Xm, ls, sv)
    eye = np.eye(n)
    last_exc = None
    for attempt in range(NOISE_ESCALATION_RETRIES + 1):
        level = nv * 10.0**attempt
        try:
            fact = spd_factor(kernel + level * eye)
        except SingularGram as exc:
            last_exc = exc
            continue
        alphas = fact.solve(eta_c)
        names = class_names if class_names is not None else tuple(
            f"class_{k}" for k in range(Y.shape[1])
        )
        return JacobiGpModel(
            train_X=Xm, alphas=alphas, length_scale=ls, signal_var=sv,
            noise_var=level, a=float(a), b=float(b),
            class_names=tuple(names), target_means=mu,
        )
    raise SingularGram(
        f"kernel system singular even after noise escalation to {nv * 10.0**NOISE_ESCALATION_RETRIES:.3e}"
    ) from last_exc


def predict_gp_scores(model: JacobiGpModel, x) -> np.ndarray:
    """Per-class posterior means at x: k(x, X_train) alphas + target means."""
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.shape[0] != model.p:
        raise InvalidInput(f"feature vector has length {xv.shape[0]}, model expects {model.p}")
    if not np.all(np.isfinite(xv)):
        raise InvalidInput("feature vector contains non-finite entries")
    kvec = backend.rbf_matrix(
        np.ascontiguousarray(xv[None, :]), model.train_X,
        model.length_scale, model.signal_var,
    )
    return backend.matmul(kvec, model.alphas)[0] + model.target_means


def predict_gp(model: JacobiGpModel, x) -> int:
    """Argmax of the per-class posterior means; lowest index wins ties."""
    return int(np.argmax(predict_gp_scores(model, x)))


def predict_gp_classes(model: JacobiGpModel, X) -> np.ndarray:
    """Predicted class index for every row of X."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != model.p:
        raise InvalidInput(f"X has {Xm.shape[1]} columns, model expects {model.p}")
    kmat = backend.rbf_matrix(Xm, model.train_X, model.length_scale, model.signal_var)
    scores = backend.matmul(kmat, model.alphas) + model.target_means
    return np.argmax(scores, axis=1)
