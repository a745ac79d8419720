"""JIT switch for the numeric kernels.

Set ``MHDCERT_DISABLE_NUMBA=1`` to force the pure-numpy code paths.  The flag
is read once, at import time.
"""

import os

_DISABLED = os.environ.get("MHDCERT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by MHDCERT_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def jit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)


__all__ = ["HAVE_NUMBA", "BACKEND", "jit"]
