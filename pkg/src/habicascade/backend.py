"""Kernel selection.

The compiled ``_ckernel`` is used when importable; otherwise the pure-Python
``_pykernel``. Set ``HABICASCADE_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import importlib
import os

__all__ = ["BACKEND", "available_backends", "get_kernel", "simulate_batch"]

_MODULES = {"cython": "habicascade._ckernel", "python": "habicascade._pykernel"}


def get_kernel(name: str):
    """Return ``simulate_batch`` from the named backend (``cython`` or ``python``)."""
    return importlib.import_module(_MODULES[name]).simulate_batch


def available_backends() -> list[str]:
    names = []
    for name in _MODULES:
        try:
            get_kernel(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select() -> str:
    forced = os.environ.get("HABICASCADE_BACKEND", "").strip().lower()
    if forced:
        if forced not in _MODULES:
            raise ImportError(f"unknown HABICASCADE_BACKEND {forced!r}")
        return forced
    try:
        get_kernel("cython")
    except ImportError:
        return "python"
    return "cython"


BACKEND = _select()
simulate_batch = get_kernel(BACKEND)
