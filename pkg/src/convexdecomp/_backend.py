"""Kernel backend selection.

The compiled module is preferred; ``CONVEXDECOMP_PURE=1`` forces the numpy
fallback (used by the benchmark and the backend-agreement tests).
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if not os.environ.get("CONVEXDECOMP_PURE"):
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass


def use(name):
    """Switch backend at runtime ("cython" or "python"); returns the previous one."""
    global kernels, BACKEND
    prev = BACKEND
    if name == "python":
        kernels, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels
        kernels, BACKEND = _kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev
