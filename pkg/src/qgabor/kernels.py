"""Backend selection for the hot loops.

The compiled extension is used when it imports cleanly; set
``QG_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

max_cube_count = _impl.max_cube_count
twisted_convolve_dense = _impl.twisted_convolve_dense

__all__ = ["BACKEND", "max_cube_count", "twisted_convolve_dense"]
