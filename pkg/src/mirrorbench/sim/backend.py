"""Kernel backend selection.

The compiled extension is used when importable; ``MIRRORBENCH_BACKEND=python``
forces the numpy fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python")


def available_backends() -> tuple[str, ...]:
    return BACKENDS if _compiled is not None else ("python",)


def get_backend(name: str | None = None) -> ModuleType:
    name = name or os.environ.get("MIRRORBENCH_BACKEND") or ("cython" if _compiled is not None else "python")
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; reinstall with Cython available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")


def default_backend_name() -> str:
    mod = get_backend()
    return "cython" if mod is _compiled and _compiled is not None else "python"
