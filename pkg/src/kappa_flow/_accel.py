"""Backend selection for the hot stencil kernels.

Set ``KAPPA_FLOW_BACKEND=numpy`` to force the pure-numpy path; the default
is ``numba`` when the package imports, otherwise numpy.
"""
from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

ENV_FLAG = "KAPPA_FLOW_BACKEND"

try:
    import numba

    NUMBA_AVAILABLE = True
    njit = numba.njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


def backend_name() -> str:
    """Return the active backend, re-reading the environment every call."""
    choice = os.environ.get(ENV_FLAG, "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{ENV_FLAG} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not NUMBA_AVAILABLE:
        logger.warning("numba not importable, falling back to numpy kernels")
        return "numpy"
    return choice

