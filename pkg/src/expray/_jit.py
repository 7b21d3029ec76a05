"""numba switch.

Set ``EXPRAY_DISABLE_JIT=1`` to force the pure-numpy kernels even when numba
is importable.  ``EXPRAY_THREADS`` caps the worker count used by renders.
"""

import os

_FALSY = ("", "0", "false", "no", "off")

DISABLE_JIT = os.environ.get("EXPRAY_DISABLE_JIT", "0").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAVE_NUMBA = numba is not None and not DISABLE_JIT

if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the work-queue layer ships with numba; TBB/OpenMP availability varies by host
    numba.config.THREADING_LAYER = "workqueue"


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def thread_count(requested=None):
    """Worker count: explicit request, else EXPRAY_THREADS, else 1."""
    if requested is None:
        env = os.environ.get("EXPRAY_THREADS", "").strip()
        requested = int(env) if env else 1
    return max(1, int(requested))
