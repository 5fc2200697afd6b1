"""Numba dispatch.

Kernels in :mod:`tvsreg._kernels` are written as plain loops over numpy
arrays. When numba is importable and ``TVS_DISABLE_NUMBA`` is unset (or
``0``), they are compiled with ``njit``; otherwise the same source runs as
ordinary Python. Both paths consume the same pre-drawn random numbers, so
they return identical results.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("TVS_DISABLE_NUMBA", "0").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("disabled by TVS_DISABLE_NUMBA")
    import numba
    from numba import njit as _njit

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; skip the probe and its warning
        numba.config.THREADING_LAYER = "omp"

    from numba import prange

    HAS_NUMBA = True
except ImportError:
    numba = None
    prange = range
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAS_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper


def configure_threads() -> int:
    """Apply ``TVS_THREADS`` to numba's thread pool; return the count in use."""
    if not HAS_NUMBA:
        return 1
    requested = os.environ.get("TVS_THREADS")
    if requested:
        n = max(1, min(int(requested), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
    return numba.get_num_threads()


def python_impl(func):
    """Return the uncompiled Python function behind a kernel."""
    return getattr(func, "py_func", func)
