"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise the
NumPy fallback is used. Setting INEWTON_PURE_PYTHON=1 forces the fallback,
which is mainly useful for benchmarking and debugging.
"""

import os

from . import _kernels_py

_FORCE_PY = os.environ.get("INEWTON_PURE_PYTHON", "").lower() in ("1", "true", "yes")

kernels = _kernels_py
_BACKEND = "python"

if not _FORCE_PY:
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        _BACKEND = "compiled"


def kernel_backend() -> str:
    """Name of the kernel set in use: 'compiled' or 'python'."""
    return _BACKEND
