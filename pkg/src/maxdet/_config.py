"""Kernel backend selection.

MAXDET_BACKEND picks how the hot kernels run:

  auto   (default) use numba when importable, else pure numpy
  numba  require numba, fail loudly if missing
  numpy  force the pure-numpy implementations

The decision is made once at import time.  ``jit`` is either
``numba.njit(cache=True, nogil=True)`` or an identity decorator, so the
loop kernels in ``_loops`` compile only when numba is active.
"""

import os

_requested = os.environ.get("MAXDET_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        "MAXDET_BACKEND must be one of auto/numba/numpy, got %r" % _requested
    )

if _requested == "numpy":
    NUMBA_ENABLED = False
else:
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:
        if _requested == "numba":
            raise
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def jit(func):
        return numba.njit(cache=True, nogil=True)(func)
else:
    def jit(func):
        return func


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
