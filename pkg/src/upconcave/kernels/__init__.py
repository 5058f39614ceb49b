"""Hot kernels with a compiled (numba) and a pure-numpy implementation.

``BACKEND`` names the implementation selected at import time; both modules
stay importable (``numba_impl`` is None when numba is missing) so tests and
benchmarks can compare them directly.
"""
from .._accel import HAVE_NUMBA, USE_NUMBA
from . import _numpy as numpy_impl

if HAVE_NUMBA:
    from . import _numba as numba_impl
else:
    numba_impl = None

_impl = numba_impl if USE_NUMBA else numpy_impl
BACKEND = "numba" if USE_NUMBA else "numpy"

capped_simplex_project = _impl.capped_simplex_project
coverage_lovasz = _impl.coverage_lovasz
base_projection = _impl.base_projection
coverage_inner = _impl.coverage_inner
multilinear_value = _impl.multilinear_value
multilinear_grad = _impl.multilinear_grad
coverage_marginals = _impl.coverage_marginals
grid_max_quadratic = _impl.grid_max_quadratic

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "capped_simplex_project",
    "coverage_lovasz",
    "base_projection",
    "coverage_inner",
    "multilinear_value",
    "multilinear_grad",
    "coverage_marginals",
    "grid_max_quadratic",
]
