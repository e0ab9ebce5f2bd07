"""Feature-space preprocessing: PCA with explained-variance reporting, and
column standardization for the ridge baseline.

Sample-covariance convention is 1/(n-1) throughout.  Eigenvector signs are
fixed so the largest-magnitude entry of each component is positive, which
makes fitted projections byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .linalg import as_matrix, gram, sym_eig


@dataclass(frozen=True)
class PcaProjection:
    """Column means, top-d orthonormal components, and the variance ledger."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    total_variance: float

    @property
    def d(self) -> int:
        return self.components.shape[1]

    @property
    def explained_variance_ratio(self) -> float:
        if self.total_variance <= 0:
            return 1.0
        return float(np.sum(self.explained_variance) / self.total_variance)


@dataclass(frozen=True)
class Standardizer:
    """Column means and positive scales; zero-variance columns get scale 1."""

    mean: np.ndarray
    scale: np.ndarray


def fit_pca(X, d: int) -> PcaProjection:
    """Top-d principal components of the sample covariance of X."""
    Xm = as_matrix(X, "X")
    n, p = Xm.shape
    if not isinstance(d, (int, np.integer)) or not (1 <= d <= min(n - 1, p)):
        raise InvalidInput(
            f"d must satisfy 1 <= d <= min(n - 1, p) = {min(n - 1, p)}, got {d}"
        )
    mean = Xm.mean(axis=0)
    centered = Xm - mean
    cov = gram(centered) / (n - 1)
    values, vectors = sym_eig(cov)
    values = np.maximum(values, 0.0)
    components = vectors[:, :d].copy()
    for j in range(d):
        peak = np.argmax(np.abs(components[:, j]))
        if components[peak, j] < 0:
            components[:, j] = -components[:, j]
    return PcaProjection(
        mean=mean,
        components=np.ascontiguousarray(components),
        explained_variance=values[:d].copy(),
        total_variance=float(values.sum()),
    )


def apply_pca(proj: PcaProjection, X) -> np.ndarray:
    """(X - mean) @ components; output is n x d."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != proj.mean.shape[0]:
        raise InvalidInput(
            f"X has {Xm.shape[1]} columns but the projection was fitted on "
            f"{proj.mean.shape[0]}"
        )
    return (Xm - proj.mean) @ proj.components


def fit_standardizer(X) -> Standardizer:
    """Column means and sample standard deviations (ddof=1)."""
    Xm = as_matrix(X, "X")
    if Xm.shape[0] < 2:
        raise InvalidInput("standardization needs at least 2 rows")
    mean = Xm.mean(axis=0)
    scale = Xm.std(axis=0, ddof=1)
    scale[scale == 0.0] = 1.0
    return Standardizer(mean=mean, scale=scale)


def apply_standardizer(s: Standardizer, X) -> np.ndarray:
    """(X - mean) / scale columnwise."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != s.mean.shape[0]:
        raise InvalidInput(
            f"X has {Xm.shape[1]} columns but the standardizer was fitted on "
            f"{s.mean.shape[0]}"
        )
    return (Xm - s.mean) / s.scale
