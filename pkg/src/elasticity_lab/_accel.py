"""Backend switch for the compiled kernels.

Set ``ELASTICITY_LAB_DISABLE_NUMBA=1`` before import to force the pure-numpy
path, e.g. when numba is unavailable or to cross-check results.
"""

import os

_FLAG = "ELASTICITY_LAB_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes")


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it unchanged."""
    if not HAS_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
