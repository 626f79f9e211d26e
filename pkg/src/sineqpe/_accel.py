"""Numba availability switch.

Set ``SINEQPE_PURE_NUMPY=1`` to force the vectorised numpy kernels even
when numba is importable.
"""
import logging
import os

logger = logging.getLogger(__name__)

_FLAG = "SINEQPE_PURE_NUMPY"


def _env_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


# tbb is probed first by default and warns on old installs
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
    prange = numba.prange
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    logger.warning("numba not importable; using pure-numpy kernels")

    def njit(pyfunc=None, **kwargs):
        def wrap(func):
            return func
        return wrap if pyfunc is None else wrap(pyfunc)

    prange = range

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def set_num_threads(n):
    """Set the numba worker count; no-op on the numpy path."""
    if not n:
        return
    n = int(n)
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    if HAVE_NUMBA:
        limit = numba.config.NUMBA_NUM_THREADS
        if n > limit:
            raise ValueError(f"{n} threads requested but numba was started with {limit}; "
                             "raise NUMBA_NUM_THREADS")
        numba.set_num_threads(n)
