"""Backend selection for the hot kernels.

``OZLAB_BACKEND=numpy`` forces the pure numpy/scipy path; the default is
numba when it imports cleanly.  Both paths consume the same pre-drawn
uniforms, so they produce identical outputs.
"""
from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_requested = os.environ.get("OZLAB_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"OZLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and numba is not None) else "numpy"


def njit(f=None, **options):
    """``numba.njit`` with caching on, or the identity when numba is missing."""
    options.setdefault("cache", True)
    if numba is None:
        return f if f is not None else (lambda g: g)
    if f is None:
        return lambda g: numba.njit(g, **options)
    return numba.njit(f, **options)
