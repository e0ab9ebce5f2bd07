"""Dense linear algebra shared by every estimator in the package.

Gram matrices, symmetric positive-definite solves via Cholesky (never an
explicit inverse), least-squares projection onto a design's column space,
and symmetric eigendecomposition for PCA.  All accumulation is in double
precision; every function is pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import EigFailure, InvalidInput, SingularGram

# Factorization retry policy: 3 jittered retries, scale multiplied by 10
# each time, starting from 1e-10 * trace(A)/p.  Applied jitter is recorded
# on the factorization, never hidden.
JITTER_RELATIVE = 1e-10
JITTER_RETRIES = 3
JITTER_GROWTH = 10.0


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a C-contiguous float64 2-D array; 1-D input becomes a column.

    Raises InvalidInput on empty, >2-D, or non-finite input.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 1-D or 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise InvalidInput(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return np.ascontiguousarray(arr)


def gram(X) -> np.ndarray:
    """X'X, symmetric by construction (upper triangle computed, mirrored)."""
    Xm = as_matrix(X, "X")
    return backend.gram(Xm)


@dataclass(frozen=True)
class SpdFactorization:
    """Lower-triangular Cholesky factor of A + jitter*I.

    ``factor @ factor.T`` reproduces the factored matrix; ``jitter_applied``
    is 0.0 when the plain factorization succeeded.
    """

    factor: np.ndarray
    jitter_applied: float

    @property
    def dimension(self) -> int:
        return self.factor.shape[0]

    def solve(self, B) -> np.ndarray:
        """Solve A z = B for each column of B using the stored factor."""
        Bm = as_matrix(B, "B")
        if Bm.shape[0] != self.dimension:
            raise InvalidInput(
                f"right-hand side has {Bm.shape[0]} rows, expected {self.dimension}"
            )
        return backend.solve_cholesky(self.factor, Bm)


def spd_factor(A) -> SpdFactorization:
    """Factor a symmetric positive-definite matrix, escalating jitter on failure."""
    Am = as_matrix(A, "A")
    p = Am.shape[0]
    if Am.shape[1] != p:
        raise InvalidInput(f"matrix must be square, got {Am.shape}")
    if not np.allclose(Am, Am.T, rtol=1e-8, atol=1e-8):
        raise InvalidInput("matrix must be symmetric")

    trace = float(np.trace(Am))
    base = JITTER_RELATIVE * trace / p if trace > 0 else JITTER_RELATIVE
    jitters = [0.0] + [base * JITTER_GROWTH**k for k in range(JITTER_RETRIES)]
    for jitter in jitters:
        target = Am if jitter == 0.0 else Am + jitter * np.eye(p)
        try:
            factor = backend.cholesky(np.ascontiguousarray(target))
        except np.linalg.LinAlgError:
            continue
        return SpdFactorization(factor=factor, jitter_applied=jitter)
    raise SingularGram(
        "factorization failed after jitter escalation "
        f"(last jitter {jitters[-1]:.3e}); the design matrix is rank-deficient "
        "(full column rank is required)"
    )


def spd_solve(A, B) -> np.ndarray:
    """Solve A Z = B for symmetric positive-definite A."""
    return spd_factor(A).solve(B)


def design_factorization(X) -> SpdFactorization:
    """Factor the Gram matrix of a design, for reuse across many solves."""
    return spd_factor(gram(X))


def project_onto_design(X, T) -> np.ndarray:
    """Least-squares coefficients (X'X)^-1 X'T, column by column of T."""
    Xm = as_matrix(X, "X")
    Tm = as_matrix(T, "T")
    if Tm.shape[0] != Xm.shape[0]:
        raise InvalidInput(
            f"T has {Tm.shape[0]} rows but X has {Xm.shape[0]}"
        )
    fact = spd_factor(backend.gram(Xm))
    return fact.solve(backend.crossprod(Xm, Tm))


def sym_eig(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix."""
    Am = as_matrix(A, "A")
    if Am.shape[0] != Am.shape[1]:
        raise InvalidInput(f"matrix must be square, got {Am.shape}")
    if not np.allclose(Am, Am.T, rtol=1e-8, atol=1e-8):
        raise InvalidInput("matrix must be symmetric")
    try:
        values, vectors = np.linalg.eigh(Am)
    except np.linalg.LinAlgError as exc:
        raise EigFailure(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(values)[::-1]
    return values[order].copy(), np.ascontiguousarray(vectors[:, order])
