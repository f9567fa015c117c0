"""Pure-Python (NumPy/SciPy) reference implementations of the hot kernels."""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

BACKEND = "python"


def cholesky_solve(a, b):
    """Solve A X = B for Hermitian positive-definite A via Cholesky.

    a: (n, n) complex; b: (n,) or (n, m). Raises np.linalg.LinAlgError when
    the factorization fails (A not positive definite / singular).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    fac = cho_factor(a, lower=True, check_finite=False)
    return cho_solve(fac, b, check_finite=False)


def shifted_solve(a, b, shift):
    """Solve (A + shift*I) X = B."""
    a = np.asarray(a, dtype=np.complex128)
    return cholesky_solve(a + shift * np.eye(a.shape[0]), b)


def shifted_power(a, b, shift):
    """Return ||(A + shift*I)^-1 B||_F^2."""
    x = shifted_solve(a, b, shift)
    return float(np.sum(np.abs(x) ** 2))
