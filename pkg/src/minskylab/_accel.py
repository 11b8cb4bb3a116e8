"""Optional numba acceleration.

Set ``MINSKYLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable. The flag is read once, at import time.
"""
import os

_disabled = os.environ.get("MINSKYLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is available, identity otherwise.

    The decorated function is always compiled when numba is installed, so the
    numba backend can be benchmarked against numpy regardless of the flag.
    """
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
