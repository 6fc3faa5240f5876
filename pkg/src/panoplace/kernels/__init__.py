"""Hot numeric kernels with selectable backend.

The numba backend is used when importable; set PPC_BACKEND=numpy to force
the pure-numpy fallback (or PPC_BACKEND=numba to fail loudly if numba is
missing). Selection happens once at import. Both implementations stay
importable for tests and benchmarks as kernels.numpy_backend /
kernels.numba_backend.
"""

from __future__ import annotations

import os

from . import numpy_backend

try:
    from . import numba_backend
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    numba_backend = None

_requested = os.environ.get("PPC_BACKEND", "auto").strip().lower()
if _requested in ("auto", ""):
    _active = numba_backend if numba_backend is not None else numpy_backend
elif _requested == "numba":
    if numba_backend is None:
        raise ImportError("PPC_BACKEND=numba but numba is not importable")
    _active = numba_backend
elif _requested == "numpy":
    _active = numpy_backend
else:
    raise ValueError(f"unknown PPC_BACKEND value: {_requested!r} (use numba or numpy)")

BACKEND = "numpy" if _active is numpy_backend else "numba"

conv3x3_forward = _active.conv3x3_forward
conv3x3_backward = _active.conv3x3_backward
maxpool2x2_forward = _active.maxpool2x2_forward
maxpool2x2_backward = _active.maxpool2x2_backward
rowmax_forward = _active.rowmax_forward
rowmax_backward = _active.rowmax_backward
raycast_boxes = _active.raycast_boxes
