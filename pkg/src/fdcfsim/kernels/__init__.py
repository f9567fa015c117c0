"""Hot linear-algebra kernels with a compiled core and a pure-NumPy fallback.

The compiled Cython extension is preferred when it imported cleanly; set
FDCFSIM_PURE_PY=1 to force the NumPy fallback. Both backends expose the same
three functions and raise ``numpy.linalg.LinAlgError`` on non-PD input:

- ``cholesky_solve(a, b)``      solve A X = B, A Hermitian positive definite
- ``shifted_solve(a, b, s)``    solve (A + s I) X = B
- ``shifted_power(a, b, s)``    ||(A + s I)^-1 B||_F^2 without returning X
"""

import os

from . import _pykernels

if os.environ.get("FDCFSIM_PURE_PY"):
    active = _pykernels
else:
    try:
        from . import _ckernels as active
    except ImportError:
        active = _pykernels

BACKEND = active.BACKEND
cholesky_solve = active.cholesky_solve
shifted_solve = active.shifted_solve
shifted_power = active.shifted_power

__all__ = ["BACKEND", "cholesky_solve", "shifted_solve", "shifted_power", "active"]
