"""Numeric core for the per-tick chain computations.

Two interchangeable implementations of the same flat-array kernels exist: a
Cython extension (`_ckernels`) compiled at install time, and a pure-numpy
fallback (`_pykernels`).  The extension is picked at import when available;
set PLUCKSIM_BACKEND=python or =c to force a choice.
"""

import os

from . import _pykernels

_requested = os.environ.get("PLUCKSIM_BACKEND", "").lower()

if _requested == "python":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND", "_pykernels"]
