"""Picks the compiled batched kernels when available, else the numpy ones.

Set DIRACGEOM_PURE=1 to force the numpy path.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DIRACGEOM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _c(x):
    return np.ascontiguousarray(x, dtype=float)


def structure_residuals(A, Ai, B, Binv):
    """(N, 6) Frobenius residuals of the structure identities for a batch of Ad matrices."""
    return _impl.structure_residuals(_c(A), _c(Ai), _c(B), _c(Binv))


def isotropy_residuals(M):
    """(N,) isotropy residuals for a batch of 2n x k bases."""
    return _impl.isotropy_residuals(_c(M))
