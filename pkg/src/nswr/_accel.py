"""
Numba switch for the hot kernels.

Setting ``NSWR_DISABLE_NUMBA=1`` (or running without numba installed) routes
every kernel to its numpy / plain-Python fallback.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


def numba_enabled() -> bool:
    """Re-read on every call so tests can flip the flag with monkeypatch."""
    flag = os.environ.get("NSWR_DISABLE_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag in ("", "0", "false", "no")


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    The undecorated function stays reachable as ``.py_func`` in both cases.
    """
    if numba is None:
        func.py_func = func
        return func
    return numba.njit(cache=True)(func)
