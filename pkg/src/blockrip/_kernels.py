"""Pick the kernel backend at import time.

The compiled extension is used when it is importable; otherwise, or when the
environment variable ``BLOCKRIP_BACKEND=python`` is set, the NumPy fallback
is used. Both expose ``shrink``, ``admm_shrink_update`` and ``ric_enumerate``.
"""

from __future__ import annotations

import importlib
import os

from . import _pykernels

__all__ = ["kernels", "BACKEND", "get_backend", "available_backends"]


def _load_compiled():
    try:
        return importlib.import_module("blockrip._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (``"cython"``, ``"python"`` or ``None`` = auto)."""
    if name is None or name == "auto":
        return _compiled if _compiled is not None else _pykernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("the compiled kernel extension is not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


kernels = get_backend(os.environ.get("BLOCKRIP_BACKEND") or None)
BACKEND = kernels.NAME
