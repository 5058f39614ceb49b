import numpy as np
import pytest

from upconcave import kernels

KERNEL_NAMES = [n for n in kernels.__all__ if n not in ("BACKEND", "numpy_impl", "numba_impl")]
BACKENDS = ["numpy"] + (["numba"] if kernels.numba_impl is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one implementation for the duration of a test."""
    impl = kernels.numpy_impl if request.param == "numpy" else kernels.numba_impl
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
