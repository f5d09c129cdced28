"""Hot bit-matching kernels with selectable backend.

Two implementations of the same integer kernels exist:

* ``ais_kit.kernels._numba`` -- ``@njit`` nested loops (default when numba
  is importable).
* ``ais_kit.kernels._numpy`` -- vectorized pure-numpy fallback.

The backend is chosen once at import time from the ``AIS_KIT_NUMBA``
environment variable: ``0/false/off/no`` forces the numpy fallback,
``1/true/on/yes`` requires numba (ImportError if missing), anything else
auto-detects. Both backends return identical arrays (all-integer
arithmetic), so the switch never changes results, only speed.

Kernel contracts:

``longest_run_matrix(a, b)``
    ``out[i, j]`` = length of the longest run of positions where rows
    ``a[i]`` and ``b[j]`` hold equal bits.

``reaction_matrix(epitopes, paratopes, s, min_overlap, shifted)``
    ``out[j, i]`` = summed reaction strength of paratope row ``i`` against
    epitope row ``j``: per alignment, the count of complementary bit pairs
    scores ``1 + (count - s)`` when ``count >= s`` and 0 otherwise; the sum
    runs over offset 0 only (``shifted=False``) or over every shift keeping
    at least ``min_overlap`` overlapping positions.
"""

import os

from ais_kit.kernels import _numpy as numpy_backend

_FLAG = os.environ.get("AIS_KIT_NUMBA", "auto").strip().lower()

numba_backend = None
if _FLAG not in ("0", "false", "off", "no"):
    try:
        from ais_kit.kernels import _numba as numba_backend
    except ImportError:
        if _FLAG in ("1", "true", "on", "yes"):
            raise
        numba_backend = None

_active = numba_backend if numba_backend is not None else numpy_backend

longest_run_matrix = _active.longest_run_matrix
reaction_matrix = _active.reaction_matrix


def backend_name() -> str:
    """Name of the backend selected at import ('numba' or 'numpy')."""
    return "numba" if _active is numba_backend else "numpy"


def warmup() -> None:
    """Trigger one compilation of each kernel (no-op on the numpy backend)."""
    import numpy as np

    a = np.zeros((1, 2), dtype=np.uint8)
    b = np.ones((1, 2), dtype=np.uint8)
    longest_run_matrix(a, b)
    reaction_matrix(a, b, 1, 1, True)


__all__ = [
    "longest_run_matrix",
    "reaction_matrix",
    "backend_name",
    "warmup",
    "numpy_backend",
    "numba_backend",
]
