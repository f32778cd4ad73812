"""Backend switch for the hot kernels.

Set ``QUADQUBIT_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
The numba path is also skipped silently when numba is not importable.
"""
import os

_DISABLED = os.environ.get("QUADQUBIT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda f: f


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
