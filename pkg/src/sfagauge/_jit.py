"""Backend selection for the compiled kernels.

Set ``SFAGAUGE_DISABLE_NUMBA=1`` to force the pure numpy/scipy path.
"""

import os

_FLAG = os.environ.get("SFAGAUGE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(f):
    """``numba.njit(cache=True)`` when available, otherwise ``f`` unchanged."""
    if numba is None:
        return f
    return numba.njit(cache=True)(f)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
