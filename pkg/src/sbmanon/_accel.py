"""JIT switch for the hot kernels.

Kernels are compiled with numba unless ``SBMANON_DISABLE_JIT`` is set to a
truthy value (or numba is not importable), in which case the pure numpy
implementations are used.  Both paths produce identical results.
"""
import os

_flag = os.environ.get("SBMANON_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_JIT = numba is not None and _flag not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode with on-disk caching.

    Returns ``func`` untouched when numba is missing.
    """
    if numba is None:  # pragma: no cover
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if USE_JIT else "numpy"
