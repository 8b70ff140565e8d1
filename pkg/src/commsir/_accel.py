"""Optional numba acceleration.

Set ``COMMSIR_DISABLE_NUMBA=1`` to force the pure-numpy code paths even when
numba is installed. The flag is read once, at import time.
"""
from __future__ import annotations

import os

_FLAG = "COMMSIR_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled_by_env():
        raise ImportError(f"numba disabled via {_FLAG}")
    import numba as _numba

    NUMBA_ENABLED = True
except ImportError:
    _numba = None
    NUMBA_ENABLED = False


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not NUMBA_ENABLED:
        return func
    return _numba.njit(cache=True)(func)


def default_kernel() -> str:
    return "bfs" if NUMBA_ENABLED else "chain"
