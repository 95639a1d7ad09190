"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting
``PROJINV_PURE_PYTHON=1`` forces the numpy fallback.  ``BACKEND`` names the
active one.  ``PROJINV_THREADS`` caps the thread count of the parallel
kernels (default 1, so results never depend on scheduling).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("PROJINV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

bilinear = _impl.bilinear
sobel = _impl.sobel
warp = _impl.warp
frame_jacobian_batch = _impl.frame_jacobian_batch


def thread_count() -> int:
    raw = os.environ.get("PROJINV_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
