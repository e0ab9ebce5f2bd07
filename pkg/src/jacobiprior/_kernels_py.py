"""NumPy implementations of the hot kernels.

This is the fallback backend used when the compiled extension is not
available (and the reference the compiled kernels are benchmarked against).
Every function here must keep exactly the same signature and semantics as
its twin in ``_kernels_cy``.
"""

import numpy as np
import scipy.linalg

NAME = "python"


def gram(x):
    """X'X with exact symmetry: upper triangle computed, then mirrored."""
    a = x.T @ x
    u = np.triu(a)
    return u + np.triu(a, 1).T


def crossprod(x, t):
    """X'T."""
    return x.T @ t


def matmul(a, b):
    return a @ b


def cholesky(a):
    """Lower-triangular factor L with L L' = a.  Raises LinAlgError if a is
    not positive definite."""
    return np.linalg.cholesky(a)


def solve_cholesky(factor, b):
    """Solve (L L') z = b given the lower factor L."""
    y = scipy.linalg.solve_triangular(factor, b, lower=True, check_finite=False)
    return scipy.linalg.solve_triangular(factor.T, y, lower=False, check_finite=False)


def rbf_matrix(a, b, length_scale, signal_var):
    """Pairwise squared-exponential kernel between the rows of a and b."""
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return signal_var * np.exp(-sq / (2.0 * length_scale * length_scale))


def rbf_matrix_sym(a, length_scale, signal_var):
    """Kernel matrix of a set of points with itself; exactly symmetric and
    with the zero-distance value on the diagonal."""
    k = rbf_matrix(a, a, length_scale, signal_var)
    u = np.triu(k, 1)
    out = u + u.T
    np.fill_diagonal(out, signal_var)
    return out


def poisson_inversion(lam, u):
    """Poisson counts by CDF inversion, one uniform per draw.

    Walks the CDF until it passes u.  Intended for rates below ~30; the
    walk terminates early if the term underflows to zero.
    """
    lam = np.asarray(lam, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(lam.shape[0], dtype=np.int64)
    p = np.exp(-lam)
    f = p.copy()
    active = np.flatnonzero(u > f)
    k = 0
    while active.size:
        k += 1
        p[active] *= lam[active] / k
        f[active] += p[active]
        still = (u[active] > f[active]) & (p[active] > 0.0)
        out[active] = k
        active = active[still]
    return out
