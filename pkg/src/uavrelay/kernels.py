"""Backend dispatch for the hot loops.

Set ``UAVRELAY_BACKEND=numpy`` to bypass numba; the default is ``numba``
when it imports, else ``numpy``. Both backends break ties toward the
lowest relay index.
"""

import os

from . import _kernels_numpy as numpy_impl

try:
    from . import _kernels_numba as numba_impl
except ImportError:  # pragma: no cover
    numba_impl = None

_requested = os.environ.get("UAVRELAY_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"UAVRELAY_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and numba_impl is not None) else "numpy"
_impl = numba_impl if BACKEND == "numba" else numpy_impl

assign_centralized = _impl.assign_centralized
assign_distributed = _impl.assign_distributed
weber_value = _impl.weber_value
weber_derivs = _impl.weber_derivs
