"""Numba switch.

Set ``DUCTMODES_DISABLE_NUMBA=1`` to run the pure-numpy kernels instead of the
JIT-compiled ones.  The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("DUCTMODES_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Kernels are always compiled when numba exists so the benchmark can compare
    both paths; ``USE_NUMBA`` only decides which path the library dispatches to.
    """
    if NUMBA_AVAILABLE:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def deco(func):
        return func

    return deco
