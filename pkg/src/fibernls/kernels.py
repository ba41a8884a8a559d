"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``FIBERNLS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("FIBERNLS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

phase_rotate = _impl.phase_rotate
weighted_sq_sum = _impl.weighted_sq_sum
max_abs2 = _impl.max_abs2
trig_sum = _impl.trig_sum

__all__ = ["BACKEND", "phase_rotate", "weighted_sq_sum", "max_abs2", "trig_sum"]
