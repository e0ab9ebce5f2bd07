"""Kernel backend selection.

The hot numerical kernels exist twice: a compiled Cython extension
(``_kernels_cy``) and a NumPy fallback (``_kernels_py``).  The compiled
module is preferred when importable; ``JACOBIPRIOR_BACKEND=python`` (or
``compiled``) overrides the choice.  Both expose identical functions, so
everything above this module is backend-agnostic.
"""

import os

from . import _kernels_py

_FORCED = os.environ.get("JACOBIPRIOR_BACKEND", "").strip().lower()

_compiled = None
if _FORCED not in ("python", "py"):
    try:
        from . import _kernels_cy as _compiled
    except ImportError:
        _compiled = None
        if _FORCED in ("compiled", "cy", "cython"):
            raise ImportError(
                "JACOBIPRIOR_BACKEND requests the compiled backend but the "
                "extension is not built; run 'pip install -e .' first"
            )

_active = _compiled if _compiled is not None else _kernels_py

ACTIVE = _active.NAME

gram = _active.gram
crossprod = _active.crossprod
matmul = _active.matmul
cholesky = _active.cholesky
solve_cholesky = _active.solve_cholesky
rbf_matrix = _active.rbf_matrix
rbf_matrix_sym = _active.rbf_matrix_sym
poisson_inversion = _active.poisson_inversion


def available_backends():
    """Names of the importable kernel implementations."""
    names = [_kernels_py.NAME]
    if _compiled is not None:
        names.insert(0, _compiled.NAME)
    return tuple(names)


def backend_module(name):
    """Fetch a kernel module by name ('compiled' or 'python')."""
    if name == _kernels_py.NAME:
        return _kernels_py
    if _compiled is not None and name == _compiled.NAME:
        return _compiled
    raise KeyError(f"unknown or unavailable backend: {name!r}")
