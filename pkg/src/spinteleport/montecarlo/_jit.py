"""Backend switch: numba when importable and not disabled, pure numpy otherwise.

Set ``SPINTELEPORT_DISABLE_NUMBA=1`` to force the numpy path.
"""
import os

DISABLED = os.environ.get("SPINTELEPORT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    import numba
    from numba import njit, prange

    # the bundled TBB is too old for numba; omp/workqueue give identical results
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


DEFAULT_BACKEND = "numba" if HAVE_NUMBA else "numpy"


def set_threads(n: int) -> int:
    """Set the numba worker count (clipped to the configured maximum); returns it."""
    if not HAVE_NUMBA:
        return 1
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def get_threads() -> int:
    return numba.get_num_threads() if HAVE_NUMBA else 1
