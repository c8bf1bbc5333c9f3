"""Backend selection for the compiled kernels.

Set ``CONDEMIT_DISABLE_NUMBA=1`` before import to force the pure-numpy
path. If numba is not importable the numpy path is used regardless.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled() -> bool:
    return os.environ.get("CONDEMIT_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The kernels are always compiled if numba is importable so both paths
    can be benchmarked side by side; ``USE_NUMBA`` decides which one the
    public API dispatches to.
    """
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
