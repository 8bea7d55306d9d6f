"""Backend selection for the compiled kernels.

Set ``SYMORBIT_DISABLE_NUMBA=1`` to force the pure-numpy code paths.
"""
import os

DISABLED = os.environ.get("SYMORBIT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return _njit(*args, cache=True, **kwargs)

    def decorate(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return decorate


BACKEND = "numba" if HAVE_NUMBA else "numpy"
