"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set FAIRDIV_PURE=1 to force the pure implementation (used by the benchmark
and by tests that exercise both paths).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FAIRDIV_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION
HAVE_COMPILED: bool = IMPLEMENTATION == "compiled"

scatter_add = _impl.scatter_add
segment_sums = _impl.segment_sums
