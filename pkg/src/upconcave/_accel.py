"""Numba availability and backend selection.

The compiled kernels are used when numba imports cleanly, unless the
environment variable ``UPCONCAVE_BACKEND`` is set to ``numpy``.  The flag is
read once, at import time.
"""
import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()

_requested = os.environ.get("UPCONCAVE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"UPCONCAVE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

USE_NUMBA = HAVE_NUMBA and _requested == "numba"

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit
