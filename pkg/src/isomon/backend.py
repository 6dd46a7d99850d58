"""Kernel backend selection.

The compiled extension is preferred when it imports; set
``ISOMON_PURE_PYTHON=1`` to force the numpy fallback.  Both expose the same
functions, so everything downstream imports from here.
"""

from __future__ import annotations

import os

if os.environ.get("ISOMON_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND_NAME

cauchy_mul = _impl.cauchy_mul
mat_cauchy_mul = _impl.mat_cauchy_mul
lax_eval = _impl.lax_eval
transport_polyline = _impl.transport_polyline
