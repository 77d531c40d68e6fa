"""Backend selection for the numeric hot loops.

The CBOW trainer and the tree ensemble each ship two interchangeable
kernel sets: a numba @njit build and a pure-numpy build.  The active
backend is chosen once per process from the ``DPDETECT_NUMBA`` env var
("0"/"false"/"off" forces the numpy path) and falls back to numpy when
numba is not importable.  Call sites may also pass an explicit
``use_numba`` flag, which is how the benchmark times both paths in one
process.
"""
from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

_ENV_VAR = "DPDETECT_NUMBA"
_FALSE_VALUES = {"0", "false", "off", "no"}


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def numba_enabled() -> bool:
    """True when the jitted kernels should be used by default."""
    value = os.environ.get(_ENV_VAR, "").strip().lower()
    if value in _FALSE_VALUES:
        return False
    if not numba_available():
        if value and value not in _FALSE_VALUES:
            logger.warning("%s requested but numba is not importable; using numpy kernels", _ENV_VAR)
        return False
    return True


def resolve(use_numba: bool | None) -> bool:
    """Resolve an explicit override against the process default."""
    if use_numba is None:
        return numba_enabled()
    if use_numba and not numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    return use_numba
