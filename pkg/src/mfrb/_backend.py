"""Pick the compiled kernels when they import, else the pure-Python ones.

Set ``MFRB_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
import warnings

from . import _fallback

compiled = None
try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    pass

if os.environ.get("MFRB_BACKEND", "").lower() == "python" or compiled is None:
    kernels = _fallback
    if compiled is None and os.environ.get("MFRB_BACKEND", "").lower() != "python":
        warnings.warn("mfrb: compiled kernels unavailable, using the slow pure-Python path", RuntimeWarning)
else:
    kernels = compiled

BACKEND = kernels.BACKEND


def get(name: str | None = None):
    """Kernel module by name (``"compiled"``, ``"python"``) or the default one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
