"""numba shim: compiled kernels when numba is available, the identical
pure-Python code path otherwise. Kernels are written so both paths perform
the same IEEE double operations in the same order."""

try:
    from numba import njit as _numba_njit

    def njit(func):
        return _numba_njit(cache=True, nogil=True)(func)

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(func):
        return func

    HAVE_NUMBA = False
