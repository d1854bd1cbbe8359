"""Kernel selection: the compiled extension when built, else pure Python.

Set ``SFCPLACE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("SFCPLACE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

ssp_min_cost_flow = _impl.ssp_min_cost_flow
packing_max = _impl.packing_max
packing_min_cost = _impl.packing_min_cost
simplex_run = _impl.simplex_run
simplex_pivot = _impl.simplex_pivot

python_kernels = _pykernels
