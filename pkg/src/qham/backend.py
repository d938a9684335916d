"""Kernel backend selection.

The statevector kernels exist twice: a numba @njit implementation (default)
and a pure-numpy fallback. ``QHAM_BACKEND=numpy`` forces the fallback;
``QHAM_BACKEND=numba`` fails loudly if numba is unavailable instead of
degrading silently. Both backends share the same per-shot RNG streams, so a
given (circuit, seed, noise) triple samples identically on either one.
"""

from __future__ import annotations

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay importable
    numba = None
    HAS_NUMBA = False

_VALID = ("numba", "numpy")


def backend_name() -> str:
    """Active kernel backend, resolved from QHAM_BACKEND and availability."""
    choice = os.environ.get("QHAM_BACKEND", "").strip().lower()
    if choice and choice not in _VALID:
        raise ValueError(f"QHAM_BACKEND must be one of {_VALID}, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise RuntimeError("QHAM_BACKEND=numba but numba is not importable")
    return "numba" if HAS_NUMBA else "numpy"


def get_kernels():
    """Import and return the active kernel module."""
    if backend_name() == "numba":
        from qham import kernels_numba

        return kernels_numba
    from qham import kernels_numpy

    return kernels_numpy


def set_threads(n: int) -> int:
    """Set the numba thread count (no-op on the numpy backend). Returns the count in effect."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAS_NUMBA and backend_name() == "numba":
        n = min(n, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(n)
        return n
    return 1
