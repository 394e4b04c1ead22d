"""Kernel selection: the compiled extension when it imports, else the numpy twin.

Set ``SU2TIME_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"

if os.environ.get("SU2TIME_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

first_hits = _impl.first_hits
propagate_rk4 = _impl.propagate_rk4

__all__ = ["BACKEND", "first_hits", "propagate_rk4"]
