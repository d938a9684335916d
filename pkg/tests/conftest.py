import numpy as np
import pytest

from qham import backend


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so test timings exclude JIT cost."""
    if backend.backend_name() == "numba":
        from qham import kernels_numba

        kernels_numba.warmup()


@pytest.fixture(params=["numba", "numpy"])
def any_backend(request, monkeypatch):
    """Run a test under both kernel backends."""
    if request.param == "numba" and not backend.HAS_NUMBA:
        pytest.skip("numba unavailable")
    monkeypatch.setenv("QHAM_BACKEND", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
