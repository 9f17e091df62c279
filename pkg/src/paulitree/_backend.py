"""Selects the sampling kernel implementation at import time.

The compiled extension is preferred; the NumPy fallback is used when the
extension is unavailable or when PAULITREE_BACKEND=python is set.  Both
expose the same three functions and produce bit-identical outputs.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

_FORCED = os.environ.get("PAULITREE_BACKEND", "").strip().lower()

_active: ModuleType
if _FORCED == "python":
    _active = _kernels_py
elif _FORCED in ("", "cython"):
    try:
        from . import _kernels as _compiled

        _active = _compiled
    except ImportError:
        if _FORCED == "cython":
            raise ImportError(
                "PAULITREE_BACKEND=cython requested but the compiled kernels are not built"
            ) from None
        _active = _kernels_py
else:
    raise ImportError(f"unknown PAULITREE_BACKEND value {_FORCED!r}")


def active_backend() -> str:
    return _active.backend_name()


def get_module(name: str | None = None) -> ModuleType:
    """Kernel module by name ('cython' or 'python'); active one by default."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels as _compiled

        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def prefix_plus_count(*args, **kwargs):
    return _active.prefix_plus_count(*args, **kwargs)


def sample_bits(*args, **kwargs):
    return _active.sample_bits(*args, **kwargs)


def signature_counts(*args, **kwargs):
    return _active.signature_counts(*args, **kwargs)
