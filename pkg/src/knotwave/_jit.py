"""Selection between numba-compiled and pure numpy kernels.

Set ``KNOTWAVE_NUMBA=0`` in the environment to force the numpy path.  The
flag is read once at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_OFF = {"0", "false", "off", "no"}

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("KNOTWAVE_NUMBA", "1").strip().lower() not in _OFF


def njit(func):
    """Compile ``func`` in nopython mode when numba is importable."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)
