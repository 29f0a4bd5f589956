"""Backend selection for the hot raster kernels.

Prefers the compiled Cython extension; falls back to the pure NumPy
implementation when the extension is unavailable or when
``CHARTEXTRACT_PURE=1`` is set.
"""

from __future__ import annotations

import os

from . import _kernels_py

_force_pure = os.environ.get("CHARTEXTRACT_PURE", "").lower() in ("1", "true", "yes")

if not _force_pure:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "pure"
else:
    _impl = _kernels_py
    BACKEND = "pure"

erode = _impl.erode
dilate = _impl.dilate
label = _impl.label

# Always-available pure versions, for equivalence tests and benchmarks.
erode_pure = _kernels_py.erode
dilate_pure = _kernels_py.dilate
label_pure = _kernels_py.label
