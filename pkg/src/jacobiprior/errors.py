"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Malformed or out-of-contract input: bad shapes, non-finite entries,
    labels out of range, length mismatches, unusable files."""


class InvalidHyperparameter(ValueError):
    """Prior hyperparameter outside its domain (a and b must be > 0)."""


class SingularGram(Exception):
    """Symmetric factorization failed even after jitter escalation.

    Signals a rank-deficient design matrix: the normal equations cannot be
    solved reliably, so the projection estimator is undefined.
    """


class EigFailure(Exception):
    """Symmetric eigendecomposition did not converge."""


class OverflowGuard(Exception):
    """An exponentiation would overflow double precision; the offending
    row index is named in the message."""


class ModelFormatError(Exception):
    """Model file is not parseable: bad magic, unsupported version,
    truncated payload, or trailing bytes."""
