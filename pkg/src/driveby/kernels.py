"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``DRIVEBY_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("DRIVEBY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

newmark_linear = _impl.newmark_linear
kalman_filter = _impl.kalman_filter

__all__ = ["BACKEND", "newmark_linear", "kalman_filter"]
